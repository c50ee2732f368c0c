"""Multi-scale Euclidicity: how far a point's local homology is from flat space.

For every cell ``(r, s)`` of a parameter grid the annulus of the data around
``x`` is compared with a same-size uniform sample of the Euclidean annulus
``{y in R^n : r <= |y| <= s}``.  Both are turned into degree ``n - 1``
Vietoris-Rips diagrams (lifetime-thresholded) and the bottleneck distances
are averaged over the grid and over ``m`` independent model draws.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .grid import (DEFAULT_K, DEFAULT_STEPS, LocalView, ParameterGrid, grid_from_knn,
                   raw_barcode, thresholded_diagram)
from .matching import bottleneck_distance
from .pid import DEFAULT_MAX_SEARCH_DIM, compute_pid
from .pointcloud import PointCloud, distance_matrix
from .sampling import derive_seed, extend_annulus, make_rng, sample_annulus

__all__ = [
    "EuclidicityReport", "ParameterGrid", "grid_from_knn", "euclidicity_score",
    "euclidicity_batch", "baseline_pairwise", "single_scale_score", "normalize_scores",
]

#: reports whose scored fraction of the grid falls below this are flagged
MIN_COVERAGE = 0.5


@dataclass(frozen=True)
class EuclidicityReport:
    point: int
    intrinsic_dim: int
    score: float
    cells: np.ndarray = field(repr=False)
    distances: np.ndarray = field(repr=False)
    coverage: float = 1.0
    model_samples: int = 1
    seed: int = 0
    grid: ParameterGrid | None = field(default=None, repr=False)
    error: str | None = None

    @property
    def per_pair(self) -> dict[tuple[float, float], float]:
        """Mean bottleneck distance of each scored ``(r, s)`` over the model draws."""
        means = self.distances.mean(axis=1) if self.distances.size else np.empty(0)
        return {(float(r), float(s)): float(v) for (r, s), v in zip(self.cells, means)}

    @property
    def flagged(self) -> bool:
        return self.coverage < MIN_COVERAGE

    @property
    def ok(self) -> bool:
        return self.error is None


def _failed(x: int, n: int, m: int, seed: int, message: str, grid=None) -> EuclidicityReport:
    return EuclidicityReport(int(x), int(n), math.nan, np.empty((0, 2)), np.empty((0, m)),
                             0.0, m, seed, grid, message)


def _diagram(distances: np.ndarray, degree: int, cap: float, threshold: bool = True) -> np.ndarray:
    deg, birth, death = raw_barcode(distances, degree, cap)
    if not threshold:
        keep = deg == degree
        return np.column_stack((birth[keep], death[keep]))
    return thresholded_diagram(deg, birth, death, degree)


def _model_walk(grid: ParameterGrid, counts: dict, n: int, rng: np.random.Generator):
    """Yield ``(cell, points)`` for nested model samples covering the grid.

    Each row of constant s starts at its largest admissible r and grows the
    annulus inwards.  A row start extends the cell with the same r in the
    previous row when that cell exists; otherwise it is a fresh draw.
    """
    r_vals, s_vals = grid.r_values, grid.s_values
    prev_row: dict[int, object] = {}
    for j, s in enumerate(s_vals):
        row_cells = [i for i in range(len(r_vals)) if r_vals[i] < s]
        if not row_cells:
            prev_row = {}
            continue
        row: dict[int, object] = {}
        sample = None
        for i in reversed(row_cells):
            r = r_vals[i]
            count = counts[(i, j)]
            if sample is None:
                base = prev_row.get(i)
                if base is None:
                    sample = sample_annulus(n, r, s, count, rng=rng)
                else:
                    sample = extend_annulus(base, r, s, count, rng=rng)
            else:
                sample = extend_annulus(sample, r, s, count, rng=rng)
            row[i] = sample
            yield (i, j), sample.points
        prev_row = row


def _cell_counts(view: LocalView, grid: ParameterGrid):
    spans = {}
    for i, j in grid.cells:
        spans[(i, j)] = view.span(grid.r_values[i], grid.s_values[j])
    return spans


def euclidicity_score(cloud: PointCloud, x: int, n: int, grid: ParameterGrid, m: int = 1,
                      seed: int = 0, model: str = "euclidean",
                      view: LocalView | None = None, use_threshold: bool = True) -> EuclidicityReport:
    """Euclidicity of point ``x`` assuming intrinsic dimension ``n``.

    ``model="data"`` replaces every Euclidean sample by the data annulus
    itself, which must give a score of exactly zero (a test hook).
    ``use_threshold=False`` compares raw degree ``n - 1`` diagrams instead of
    lifetime-thresholded ones.
    Cells whose data annulus is empty are skipped and reported through
    ``coverage``.
    """
    x = cloud._check(x)
    n, m = int(n), int(m)
    if n < 1:
        raise ValueError("intrinsic dimension must be at least 1")
    if m < 1:
        raise ValueError("at least one model sample is required")
    if len(grid) == 0:
        raise ValueError("grid has no admissible (r, s) pair")
    if model not in ("euclidean", "data"):
        raise ValueError(f"unknown model {model!r}")
    degree = n - 1
    if view is None:
        view = LocalView(cloud, x, grid.s_max)
    spans = _cell_counts(view, grid)
    counts = {c: b - a for c, (a, b) in spans.items()}
    scored = [c for c in grid.cells if counts[c] > 0]
    if not scored:
        raise ValueError(f"point {x}: every annulus of the grid is empty")

    data = {}
    for c in scored:
        a, b = spans[c]
        data[c] = _diagram(view.block(a, b), degree, grid.cap(grid.s_values[c[1]]), use_threshold)

    row_of = {c: t for t, c in enumerate(scored)}
    dist = np.zeros((len(scored), m))
    for draw in range(m):
        if model == "data":
            continue
        rng = make_rng(derive_seed(seed, x, draw))
        for c, points in _model_walk(grid, counts, n, rng):
            t = row_of.get(c)
            if t is None:
                continue
            cap = grid.cap(grid.s_values[c[1]])
            model_diagram = _diagram(distance_matrix(points), degree, cap, use_threshold)
            dist[t, draw] = bottleneck_distance(data[c], model_diagram)
    cells = np.array([(grid.r_values[i], grid.s_values[j]) for i, j in scored])
    score = float(dist.mean())
    return EuclidicityReport(x, n, score, cells, dist, len(scored) / len(grid), m, int(seed), grid)


def single_scale_score(cloud: PointCloud, x: int, n: int, r: float, s: float, m: int = 1,
                       seed: int = 0, use_threshold: bool = True) -> EuclidicityReport:
    """Euclidicity restricted to the single cell ``(r, s)``."""
    if not r < s:
        raise ValueError(f"need r < s, got r={r}, s={s}")
    return euclidicity_score(cloud, x, n, ParameterGrid.single(r, s), m, seed,
                             use_threshold=use_threshold)


def baseline_pairwise(cloud: PointCloud, x: int, n: int, grid: ParameterGrid, m: int = 2,
                      seed: int = 0, use_threshold: bool = True) -> np.ndarray:
    """Grid-mean bottleneck distances between ``m`` Euclidean model samples.

    The samples use the data annulus sizes around ``x`` and the same seeds as
    :func:`euclidicity_score`, so the matrix is a null distribution of
    model-versus-model variation for that point.
    """
    x = cloud._check(x)
    n, m = int(n), int(m)
    if m < 2:
        raise ValueError("at least two model samples are required")
    degree = n - 1
    view = LocalView(cloud, x, grid.s_max)
    spans = _cell_counts(view, grid)
    counts = {c: b - a for c, (a, b) in spans.items()}
    scored = [c for c in grid.cells if counts[c] > 0]
    if not scored:
        raise ValueError(f"point {x}: every annulus of the grid is empty")
    keep = set(scored)
    diagrams = []
    for draw in range(m):
        rng = make_rng(derive_seed(seed, x, draw))
        per_cell = {}
        for c, points in _model_walk(grid, counts, n, rng):
            if c in keep:
                cap = grid.cap(grid.s_values[c[1]])
                per_cell[c] = _diagram(distance_matrix(points), degree, cap, use_threshold)
        diagrams.append(per_cell)
    out = np.zeros((m, m))
    for a in range(m):
        for b in range(a + 1, m):
            v = np.mean([bottleneck_distance(diagrams[a][c], diagrams[b][c]) for c in scored])
            out[a, b] = out[b, a] = v
    return out


def _resolve_dim(n_source, cloud, x, k, steps):
    if isinstance(n_source, str):
        if n_source != "pid":
            raise ValueError(f"unknown dimension source {n_source!r}")
        grid = grid_from_knn(cloud, x, k, steps)
        profile = compute_pid(cloud, x, grid, DEFAULT_MAX_SEARCH_DIM)
        return max(1, int(round(profile.aggregate)))
    if isinstance(n_source, (int, np.integer)):
        return int(n_source)
    return int(n_source[x])


def _point_task(cloud, x, n_source, k, steps, m, seed, grid, use_threshold):
    n = 0
    try:
        n = _resolve_dim(n_source, cloud, x, k, steps)
        g = grid if grid is not None else grid_from_knn(cloud, x, k, steps)
        return euclidicity_score(cloud, x, n, g, m, seed, use_threshold=use_threshold)
    except (ValueError, KeyError, IndexError, OverflowError) as exc:
        return _failed(x, n, m, seed, str(exc))


def euclidicity_batch(cloud: PointCloud, query_ids, n_source=2, k: int = DEFAULT_K,
                      steps: int = DEFAULT_STEPS, m: int = 1, seed: int = 0, threads: int = 1,
                      grid: ParameterGrid | None = None, progress=None,
                      use_threshold: bool = True) -> list[EuclidicityReport]:
    """Reports for ``query_ids`` in the given order.

    ``n_source`` is a fixed dimension, ``"pid"`` (rounded mean persistent
    intrinsic dimension of each point), or a mapping/sequence indexed by point
    id.  ``grid`` overrides the per-point k-NN grid with one shared grid.
    Failures are recorded on the report and never stop the batch.
    """
    ids = [cloud._check(i) for i in query_ids]
    task = lambda x: _point_task(cloud, x, n_source, k, steps, m, seed, grid, use_threshold)
    reports = []
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        for done, rep in enumerate(pool.map(task, ids), start=1):
            reports.append(rep)
            if progress is not None:
                progress(done, len(ids))
    return reports


def normalize_scores(reports: list[EuclidicityReport]) -> np.ndarray:
    """Scores divided by the batch maximum (failed points stay NaN)."""
    scores = np.array([r.score for r in reports], dtype=np.float64)
    top = np.nanmax(scores) if np.any(np.isfinite(scores)) else math.nan
    if not top > 0:
        return scores
    return scores / top
