"""Command-line front end.

Settings are resolved as built-in defaults, then a ``--config`` file
(``key = value`` lines, or the JSON metadata written by an earlier run), then
command-line flags.  ``PLH_THREADS`` overrides the thread count unless
``--threads`` is given.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .datasets import GENERATORS, read_labels
from .euclidicity import (baseline_pairwise, euclidicity_batch, grid_from_knn, normalize_scores)
from .grid import DEFAULT_K, DEFAULT_STEPS, ParameterGrid
from .matching import bottleneck_distance
from .persistence import PersistenceDiagram, diagrams_from_json
from .pid import DEFAULT_MAX_SEARCH_DIM, mean_pid, pid_batch
from .pointcloud import PointCloud, PointCloudError, load_point_cloud
from .sampling import RNG_ALGORITHM, derive_seed, make_rng

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_FAILED = 0, 1, 2, 3

DEFAULTS = {
    "output": None,
    "format": "csv",
    "input_format": "csv",
    "input_dim": None,
    "skip_header": False,
    "labels": None,
    "k": str(DEFAULT_K),
    "steps": DEFAULT_STEPS,
    "dim": "2",
    "m": 1,
    "seed": 0,
    "threads": None,
    "queries": "all",
    "max_dim": DEFAULT_MAX_SEARCH_DIM,
    "no_threshold": False,
    "single_scale": None,
    "normalize": False,
    "per_pair": None,
    "point": 0,
    "quiet": False,
}

INT_KEYS = {"steps", "m", "seed", "threads", "max_dim", "point", "input_dim"}
BOOL_KEYS = {"skip_header", "no_threshold", "normalize", "quiet"}


class ConfigError(ValueError):
    pass


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(float(v))
    return str(v)


def read_config(path) -> dict:
    """``key = value`` lines (``#`` comments), or ``{"config": {...}}`` JSON metadata."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        if "config" not in data:
            return dict(data)
        out = dict(data["config"])
        if data.get("input"):
            out["input"] = data["input"]
        return out
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value.strip('"').strip("'")
    return out


def _coerce(key, value):
    if value is None:
        return None
    try:
        if key in INT_KEYS:
            return int(value)
        if key in BOOL_KEYS:
            if isinstance(value, bool):
                return value
            return str(value).lower() in ("1", "true", "yes", "on")
    except ValueError:
        raise ConfigError(f"invalid value for {key}: {value!r}") from None
    return value


def resolve(args: argparse.Namespace, keys) -> dict:
    config = {key: DEFAULTS.get(key) for key in keys}
    if getattr(args, "config", None):
        try:
            loaded = read_config(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        for key, value in loaded.items():
            if key in config:
                config[key] = value
            elif key not in ("command", "input"):
                raise ConfigError(f"unknown config key {key!r}")
        if "input" in loaded and getattr(args, "input", None) is None:
            args.input = loaded["input"]
    env_threads = os.environ.get("PLH_THREADS")
    if env_threads and "threads" in config:
        config["threads"] = env_threads
    for key in keys:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            config[key] = value
    config = {key: _coerce(key, value) for key, value in config.items()}
    if "threads" in config:
        if config["threads"] is None:
            config["threads"] = os.cpu_count() or 1
        if config["threads"] < 1:
            raise ConfigError("threads must be at least 1")
    if "steps" in config and config["steps"] < 2:
        raise ConfigError("steps must be at least 2")
    if "m" in config and config["m"] < 1:
        raise ConfigError("m must be at least 1")
    return config


def _progress(label, quiet):
    if quiet:
        return None

    def report(done, total):
        print(f"{label}: {done}/{total}", file=sys.stderr, flush=True)
    return report


def _load_input(config, path) -> PointCloud:
    if path is None:
        raise ConfigError("an input point cloud is required")
    try:
        return load_point_cloud(path, config["input_format"], config["input_dim"], config["skip_header"])
    except FileNotFoundError as exc:
        raise OSError(f"cannot read input: {exc}") from None


def _labels_path(config, input_path):
    if config.get("labels"):
        return Path(config["labels"])
    guess = Path(input_path).with_suffix(".labels.csv")
    return guess if guess.exists() else None


def select_queries(queries: str, cloud: PointCloud, seed: int, labels_path=None) -> list[int]:
    """``all``, comma-separated ids, ``random:N`` and ``+singular`` tokens."""
    n = len(cloud)
    out: list[int] = []
    singular = None
    if labels_path is not None and Path(labels_path).exists():
        _, singular = read_labels(labels_path)
    for token in (t.strip() for t in str(queries).split(",")):
        if not token:
            continue
        if token == "all":
            out.extend(range(n))
        elif token == "+singular":
            if singular is None:
                raise ConfigError("+singular needs a labels file")
            out.extend(singular)
        elif token.startswith("random:"):
            try:
                count = int(token.split(":", 1)[1])
            except ValueError:
                raise ConfigError(f"bad query token {token!r}") from None
            pool = np.setdiff1d(np.arange(n), singular or [])
            if count > len(pool):
                raise ConfigError(f"cannot draw {count} of {len(pool)} points")
            rng = make_rng(derive_seed(seed, n, 2**31))
            out.extend(int(i) for i in np.sort(rng.choice(pool, count, replace=False)))
        else:
            try:
                i = int(token)
            except ValueError:
                raise ConfigError(f"bad query token {token!r}") from None
            if not 0 <= i < n:
                raise ConfigError(f"query id {i} out of range")
            out.append(i)
    return out


def _ks(value) -> list[int]:
    try:
        ks = [int(k) for k in str(value).split(",") if k.strip()]
    except ValueError:
        raise ConfigError(f"bad k list {value!r}") from None
    if not ks or min(ks) < 1:
        raise ConfigError("k must be a positive integer or a comma-separated list")
    return ks


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_metadata(output, command, config, input_path, extra=None) -> None:
    record = {
        "command": command,
        "input": str(input_path) if input_path else None,
        "input_sha256": _sha256(input_path) if input_path else None,
        "config": {k: v for k, v in config.items()},
        "rng": RNG_ALGORITHM,
        "version": __version__,
    }
    if extra:
        record.update(extra)
    Path(str(output) + ".meta.json").write_text(json.dumps(record, indent=1, sort_keys=True) + "\n")


def _open_output(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


# -- subcommands -----------------------------------------------------------

def cmd_generate(args) -> int:
    keys = ["output", "seed", "labels"]
    config = resolve(args, keys)
    if config["output"] is None:
        raise ConfigError("--output is required")
    space = args.space
    params = {"seed": config["seed"]}
    if space == "pinched-torus":
        params.update(count=args.count, R=args.major, r=args.minor)
    elif space == "wedged-spheres":
        params.update(n=args.dim, count=args.count)
    elif space == "circle-wedge-sphere":
        params.update(count=args.count)
    else:
        params.update(n=args.dim, N=args.ambient or args.dim, count=args.count, radius=args.radius)
    try:
        lc = GENERATORS[space](**params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = Path(config["output"])
    labels = Path(config["labels"]) if config["labels"] else out.with_suffix(".labels.csv")
    lc.save(out, labels)
    config.update(space=space, labels=str(labels), **{k: v for k, v in params.items() if k != "seed"})
    write_metadata(out, "generate", config, None, {"params": lc.params})
    return EXIT_OK


def cmd_pid(args) -> int:
    keys = ["output", "format", "input_format", "input_dim", "skip_header", "labels", "k", "steps",
            "threads", "queries", "max_dim", "no_threshold", "seed", "quiet"]
    config = resolve(args, keys)
    cloud = _load_input(config, args.input)
    ks = _ks(config["k"])
    ids = select_queries(config["queries"], cloud, config["seed"], _labels_path(config, args.input))
    profiles = pid_batch(cloud, ids, ks, config["steps"], config["max_dim"],
                         not config["no_threshold"], config["threads"],
                         _progress("pid", config["quiet"]))
    means = mean_pid(profiles)
    fh, close = _open_output(config["output"])
    try:
        if config["format"] == "json":
            json.dump([{"point": p.point, "k": p.k, "scales": p.scales.tolist(),
                        "estimates": p.estimates.tolist(), "aggregate": p.aggregate,
                        "mean_over_k": means.get(p.point), "error": p.error} for p in profiles],
                      fh, indent=1)
            fh.write("\n")
        else:
            fh.write("point_id,k,scale,i_x,aggregate,mean_over_k,error\n")
            for p in profiles:
                rows = zip(p.scales, p.estimates) if p.error is None else [(math.nan, -1)]
                for scale, est in rows:
                    fh.write(",".join([str(p.point), str(p.k), _fmt(scale), str(int(est)),
                                       _fmt(p.aggregate), _fmt(means.get(p.point, math.nan)),
                                       p.error or ""]) + "\n")
    finally:
        if close:
            fh.close()
    if config["output"]:
        write_metadata(config["output"], "pid", config, args.input)
    failed = sum(p.error is not None for p in profiles)
    if profiles and failed == len(profiles):
        return EXIT_FAILED
    return EXIT_OK


def _dim_source(value, cloud):
    value = str(value)
    if value == "pid":
        return "pid"
    if value.isdigit():
        return int(value)
    path = Path(value)
    if not path.exists():
        raise ConfigError(f"--dim must be an integer, 'pid' or a file, got {value!r}")
    dims = {}
    rows = [line.split(",") for line in path.read_text().split() if line.strip()]
    for lineno, row in enumerate(rows):
        if len(row) == 1:
            dims[lineno] = int(float(row[0]))
        elif row[0].strip().lstrip("-").isdigit():
            dims[int(row[0])] = int(float(row[1]))
    return dims


def cmd_euclidicity(args) -> int:
    keys = ["output", "format", "input_format", "input_dim", "skip_header", "labels", "k", "steps",
            "dim", "m", "seed", "threads", "queries", "single_scale", "normalize", "per_pair", "quiet",
            "no_threshold"]
    config = resolve(args, keys)
    cloud = _load_input(config, args.input)
    ks = _ks(config["k"])
    if len(ks) != 1:
        raise ConfigError("euclidicity takes a single k")
    grid = None
    if config["single_scale"]:
        try:
            r, s = (float(v) for v in str(config["single_scale"]).split(","))
        except ValueError:
            raise ConfigError("--single-scale expects r,s") from None
        if not 0 <= r < s:
            raise ConfigError("--single-scale needs 0 <= r < s")
        grid = ParameterGrid.single(r, s)
    n_source = _dim_source(config["dim"], cloud)
    ids = select_queries(config["queries"], cloud, config["seed"], _labels_path(config, args.input))
    reports = euclidicity_batch(cloud, ids, n_source, ks[0], config["steps"], config["m"],
                                config["seed"], config["threads"], grid,
                                _progress("euclidicity", config["quiet"]),
                                use_threshold=not config["no_threshold"])
    norm = normalize_scores(reports) if config["normalize"] else None
    fh, close = _open_output(config["output"])
    try:
        if config["format"] == "json":
            records = []
            for t, rep in enumerate(reports):
                rec = {"point": rep.point, "score": rep.score, "n_used": rep.intrinsic_dim,
                       "coverage": rep.coverage, "flagged": rep.flagged, "error": rep.error,
                       "per_pair": [[r, s, v] for (r, s), v in rep.per_pair.items()]}
                if norm is not None:
                    rec["normalized_score"] = float(norm[t])
                records.append(rec)
            json.dump(records, fh, indent=1)
            fh.write("\n")
        else:
            header = ["point_id", "score", "n_used", "coverage", "r_min", "r_max", "s_min", "s_max",
                      "flagged", "error"]
            if norm is not None:
                header.insert(2, "normalized_score")
            fh.write(",".join(header) + "\n")
            for t, rep in enumerate(reports):
                g = rep.grid
                bounds = [g.r_min, g.r_max, g.s_min, g.s_max] if g is not None else [math.nan] * 4
                row = [str(rep.point), _fmt(rep.score), str(rep.intrinsic_dim), _fmt(rep.coverage),
                       *(_fmt(b) for b in bounds), str(int(rep.flagged)), (rep.error or "").replace(",", ";")]
                if norm is not None:
                    row.insert(2, _fmt(norm[t]))
                fh.write(",".join(row) + "\n")
    finally:
        if close:
            fh.close()
    if config["per_pair"]:
        with open(config["per_pair"], "w") as pp:
            pp.write("point_id,r,s,draw,bottleneck\n")
            for rep in reports:
                for (r, s), row in zip(rep.cells, rep.distances):
                    for draw, v in enumerate(row):
                        pp.write(f"{rep.point},{_fmt(r)},{_fmt(s)},{draw},{_fmt(v)}\n")
    if config["output"]:
        write_metadata(config["output"], "euclidicity", config, args.input)
    if reports and all(not rep.ok for rep in reports):
        return EXIT_FAILED
    return EXIT_OK


def cmd_baseline(args) -> int:
    keys = ["output", "input_format", "input_dim", "skip_header", "k", "steps", "dim", "m", "seed", "point"]
    config = resolve(args, keys)
    cloud = _load_input(config, args.input)
    if config["m"] < 2:
        raise ConfigError("baseline needs m >= 2")
    try:
        n = int(config["dim"])
    except ValueError:
        raise ConfigError("baseline needs an integer --dim") from None
    ks = _ks(config["k"])
    try:
        grid = grid_from_knn(cloud, config["point"], ks[0], config["steps"])
        matrix = baseline_pairwise(cloud, config["point"], n, grid, config["m"], config["seed"])
    except PointCloudError as exc:
        raise ConfigError(str(exc)) from None
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    fh, close = _open_output(config["output"])
    try:
        for row in matrix:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    finally:
        if close:
            fh.close()
    if config["output"]:
        write_metadata(config["output"], "baseline", config, args.input)
    return EXIT_OK


def _load_diagram(path, degree):
    try:
        diagrams = diagrams_from_json(Path(path).read_text())
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"{path}: not a diagram file ({exc})") from None
    if degree is None:
        degrees = sorted(diagrams)
        if len(degrees) > 1:
            raise ConfigError(f"{path} holds several degrees; pass --degree")
        degree = degrees[0] if degrees else 0
    return diagrams.get(degree, PersistenceDiagram(degree))


def cmd_bottleneck(args) -> int:
    try:
        a = _load_diagram(args.a, args.degree)
        b = _load_diagram(args.b, args.degree)
    except FileNotFoundError as exc:
        raise OSError(str(exc)) from None
    if a.degree != b.degree:
        raise ConfigError(f"degrees differ: {a.degree} vs {b.degree}")
    print(_fmt(bottleneck_distance(a, b)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="plh", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, analysis=True):
        sp.add_argument("--config", help="key = value file or metadata JSON of an earlier run")
        sp.add_argument("--output", "-o")
        sp.add_argument("--seed", type=int)
        if analysis:
            sp.add_argument("input", nargs="?")
            sp.add_argument("--input-format", choices=["csv", "raw-f64"])
            sp.add_argument("--input-dim", type=int, help="dimension of raw-f64 input")
            sp.add_argument("--skip-header", action="store_true", default=None)
            sp.add_argument("--k", help="neighbour count (pid accepts a comma-separated list)")
            sp.add_argument("--steps", type=int)

    g = sub.add_parser("generate", help="write a synthetic point cloud and its labels")
    common(g, analysis=False)
    g.add_argument("--space", required=True, choices=sorted(GENERATORS))
    g.add_argument("--count", type=int, default=2000)
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--ambient", type=int)
    g.add_argument("--radius", type=float, default=1.0)
    g.add_argument("--major", type=float, default=2.0, help="pinched torus R")
    g.add_argument("--minor", type=float, default=1.0, help="pinched torus r")
    g.add_argument("--labels")
    g.set_defaults(func=cmd_generate)

    for name, func, text in (("pid", cmd_pid, "persistent intrinsic dimension"),
                             ("euclidicity", cmd_euclidicity, "Euclidicity scores")):
        sp = sub.add_parser(name, help=text)
        common(sp)
        sp.add_argument("--format", choices=["csv", "json"])
        sp.add_argument("--labels", help="labels CSV for +singular queries")
        sp.add_argument("--threads", type=int)
        sp.add_argument("--queries", help="all | ids | random:N, combined with commas; +singular")
        sp.add_argument("--quiet", action="store_true", default=None)
        sp.set_defaults(func=func)
        sp.add_argument("--no-threshold", action="store_true", default=None,
                        help="use raw diagrams instead of lifetime-thresholded ones")
        if name == "pid":
            sp.add_argument("--max-dim", type=int)
        else:
            sp.add_argument("--dim", help="intrinsic dimension: integer, 'pid' or a CSV file")
            sp.add_argument("--m", type=int, help="model samples per point")
            sp.add_argument("--single-scale", help="fixed r,s for every point")
            sp.add_argument("--normalize", action="store_true", default=None)
            sp.add_argument("--per-pair", help="long-format CSV of per-cell distances")

    b = sub.add_parser("baseline", help="model-versus-model null distances for one point")
    common(b)
    b.add_argument("--point", type=int)
    b.add_argument("--dim")
    b.add_argument("--m", type=int)
    b.set_defaults(func=cmd_baseline)

    d = sub.add_parser("bottleneck", help="bottleneck distance between two diagram files")
    d.add_argument("a")
    d.add_argument("b")
    d.add_argument("--degree", type=int)
    d.set_defaults(func=cmd_bottleneck)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PointCloudError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
