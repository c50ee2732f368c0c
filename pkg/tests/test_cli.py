from __future__ import annotations

import csv
import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from plh.cli import main
from plh.persistence import PersistenceDiagram, diagrams_to_json


@pytest.fixture(scope="module")
def torus_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "torus.csv"
    assert main(["generate", "--space", "pinched-torus", "--count", "300", "--seed", "2",
                 "--output", str(path)]) == 0
    return path


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_generate_writes_cloud_labels_and_metadata(torus_file):
    pts = np.loadtxt(torus_file, delimiter=",")
    assert pts.shape == (301, 3)
    labels = rows(torus_file.with_suffix(".labels.csv"))
    assert sum(r["singular"] in ("1", "true", "True") for r in labels) == 1
    meta = json.loads(torus_file.with_name("torus.csv.meta.json").read_text())
    assert meta["command"] == "generate" and meta["rng"].startswith("numpy.Philox")


def test_euclidicity_csv_and_singular_query(torus_file, tmp_path):
    out = tmp_path / "scores.csv"
    code = main(["euclidicity", str(torus_file), "--queries", "0,5,+singular", "--k", "30",
                 "--steps", "4", "--threads", "1", "--quiet", "--output", str(out),
                 "--per-pair", str(tmp_path / "cells.csv")])
    assert code == 0
    table = rows(out)
    assert [r["point_id"] for r in table] == ["0", "5", "300"]
    assert {"score", "n_used", "coverage", "r_min", "r_max", "s_min", "s_max"} <= set(table[0])
    assert all(float(r["score"]) >= 0 for r in table)
    assert len(rows(tmp_path / "cells.csv")) > 0


def test_thread_count_does_not_change_bytes(torus_file, tmp_path):
    outs = []
    for threads in (1, 8):
        out = tmp_path / f"t{threads}.csv"
        assert main(["euclidicity", str(torus_file), "--queries", "random:6,+singular",
                     "--k", "30", "--steps", "4", "--m", "2", "--threads", str(threads),
                     "--quiet", "--output", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_env_thread_override(torus_file, tmp_path, monkeypatch):
    monkeypatch.setenv("PLH_THREADS", "3")
    out = tmp_path / "p.csv"
    assert main(["pid", str(torus_file), "--queries", "1", "--k", "20,30", "--steps", "3",
                 "--quiet", "--output", str(out)]) == 0
    meta = json.loads((tmp_path / "p.csv.meta.json").read_text())
    assert meta["config"]["threads"] == 3
    table = rows(out)
    assert {"point_id", "k", "scale", "i_x", "aggregate", "mean_over_k"} <= set(table[0])
    assert {r["k"] for r in table} == {"20", "30"}


def test_metadata_round_trip_reproduces_output(torus_file, tmp_path):
    out = tmp_path / "a.csv"
    assert main(["euclidicity", str(torus_file), "--queries", "2,7", "--k", "30", "--steps", "4",
                 "--seed", "4", "--threads", "1", "--quiet", "--output", str(out)]) == 0
    again = tmp_path / "b.csv"
    assert main(["euclidicity", "--config", str(out) + ".meta.json", "--output", str(again)]) == 0
    assert out.read_bytes() == again.read_bytes()


def test_config_file_and_flag_precedence(torus_file, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\nk = 30\nsteps = 3\nqueries = 4\nquiet = true\n")
    out = tmp_path / "c.csv"
    assert main(["euclidicity", str(torus_file), "--config", str(cfg), "--steps", "4",
                 "--output", str(out)]) == 0
    meta = json.loads((tmp_path / "c.csv.meta.json").read_text())
    assert meta["config"]["steps"] == 4 and meta["config"]["k"] == "30"
    assert meta["input_sha256"]


def test_bottleneck_prints_zero_for_identical_files(tmp_path, capsys):
    diag = PersistenceDiagram(1, [(0.1, 0.5), (0.2, 0.3)])
    path = tmp_path / "d.json"
    path.write_text(diagrams_to_json(diag))
    assert main(["bottleneck", str(path), str(path)]) == 0
    assert float(capsys.readouterr().out.strip()) == 0.0


def test_exit_codes(torus_file, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense = 1\n")
    assert main(["euclidicity", str(torus_file), "--config", str(bad)]) == 1
    assert main(["euclidicity", str(torus_file), "--steps", "1"]) == 1
    assert main(["euclidicity", str(tmp_path / "missing.csv"), "--output", str(tmp_path / "x.csv")]) == 2
    # every query fails: dimension larger than any annulus can support is fine, an
    # isolated point is not
    lone = tmp_path / "lone.csv"
    np.savetxt(lone, np.vstack((np.zeros((5, 2)), [[1.0, 1.0]])), delimiter=",")
    assert main(["euclidicity", str(lone), "--queries", "0", "--k", "3", "--steps", "2",
                 "--quiet", "--output", str(tmp_path / "y.csv")]) == 3


def test_console_script_runs(tmp_path):
    exe = shutil.which("plh")
    cmd = [exe] if exe else [sys.executable, "-m", "plh.cli"]
    out = tmp_path / "g.csv"
    proc = subprocess.run(cmd + ["generate", "--space", "flat-disc", "--count", "50",
                                 "--output", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert np.loadtxt(out, delimiter=",").shape == (50, 2) or out.exists()


def test_euclidicity_no_threshold_flag(torus_file, tmp_path):
    outs = {}
    for flag in ([], ["--no-threshold"]):
        out = tmp_path / f"nt{len(flag)}.csv"
        assert main(["euclidicity", str(torus_file), "--queries", "300", "--k", "30", "--steps", "4",
                     "--quiet", "--output", str(out)] + flag) == 0
        outs[bool(flag)] = float(rows(out)[0]["score"])
    meta = json.loads((tmp_path / "nt1.csv.meta.json").read_text())
    assert meta["config"]["no_threshold"] is True
    assert outs[True] >= 0 and outs[False] >= 0
