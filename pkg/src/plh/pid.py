"""Persistent intrinsic dimension of points in a cloud."""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .grid import DEFAULT_STEPS, LocalView, ParameterGrid, grid_from_knn, raw_barcode, thresholded_lifetimes
from .pointcloud import PointCloud

DEFAULT_MAX_SEARCH_DIM = 4
DEFAULT_K_SWEEP = (25, 50, 75, 100, 125, 150, 175, 200)


@dataclass(frozen=True)
class PIDProfile:
    """Dimension estimates of one point at each outer scale of its grid."""

    point: int
    scales: np.ndarray
    estimates: np.ndarray
    k: int | None = None
    cells_used: int = 0
    cells_total: int = 0
    error: str | None = None

    @property
    def aggregate(self) -> float:
        if len(self.estimates) == 0:
            return 0.0
        return float(np.mean(self.estimates))

    @property
    def empty(self) -> bool:
        """True when every annulus of the grid was empty."""
        return self.cells_used == 0

    def at(self, eps: float) -> int:
        """Estimate for scale ``eps``: the last grid scale not above it."""
        j = np.searchsorted(self.scales, eps, side="right") - 1
        return int(self.estimates[j]) if j >= 0 else 0


def search_dim(cloud: PointCloud, max_search_dim: int) -> int:
    # degrees beyond the ambient dimension cannot carry homology of a subset of R^N
    return max(1, min(int(max_search_dim), cloud.ambient_dim))


def cell_dimension(deg, birth, death, top: int, use_threshold: bool = True,
                   cascade: str = "filtered") -> int:
    """Largest i <= top + 1 whose degree i - 1 is nontrivial, or 0."""
    life = death - birth
    if use_threshold:
        masks = thresholded_lifetimes(deg, birth, death, top, cascade)
    else:
        masks = [deg == d for d in range(top + 1)]
    for d in range(top, -1, -1):
        positive = int(np.count_nonzero(life[masks[d]] > 0))
        # degree 0 counts in reduced homology: two components are needed
        if positive >= (2 if d == 0 else 1):
            return d + 1
    return 0


def compute_pid(cloud: PointCloud, x: int, grid: ParameterGrid,
                max_search_dim: int = DEFAULT_MAX_SEARCH_DIM, use_threshold: bool = True,
                k: int | None = None, view: LocalView | None = None,
                cascade: str = "filtered") -> PIDProfile:
    """Per-scale dimension estimates ``i_x(s)`` over the outer radii of ``grid``.

    ``i_x(s)`` is the largest i such that some cell ``(r, s')`` with
    ``s' <= s`` has nontrivial (thresholded) homology in degree i - 1.
    """
    if max_search_dim < 1:
        raise ValueError("max_search_dim must be at least 1")
    if len(grid) == 0:
        raise ValueError("grid has no admissible (r, s) pair")
    top = search_dim(cloud, max_search_dim) - 1
    if view is None:
        view = LocalView(cloud, x, grid.s_max)
    n_s = len(grid.s_values)
    row_best = np.zeros(n_s, dtype=np.int64)
    used = 0
    best = 0
    for i, j in grid.cells:
        if best == top + 1:
            # nothing can exceed the search cap; later cells only confirm it
            used += 1
            continue
        r, s = grid.r_values[i], grid.s_values[j]
        a, b = view.span(r, s)
        if b == a:
            continue
        used += 1
        deg, birth, death = raw_barcode(view.block(a, b), top, grid.cap(s))
        dim = cell_dimension(deg, birth, death, top, use_threshold, cascade)
        if dim > row_best[j]:
            row_best[j] = dim
            best = max(best, dim)
    estimates = np.maximum.accumulate(row_best)
    if used == 0:
        warnings.warn(f"point {x}: every annulus of the grid is empty", RuntimeWarning, stacklevel=2)
    return PIDProfile(int(x), grid.s_values.copy(), estimates, k, used, len(grid))


def _pid_task(cloud, x, ks, steps, max_search_dim, use_threshold, cascade):
    out = []
    grids = []
    for k in ks:
        try:
            grids.append(grid_from_knn(cloud, x, k, steps))
        except ValueError as exc:
            grids.append(exc)
    radius = max((g.s_max for g in grids if isinstance(g, ParameterGrid)), default=0.0)
    view = LocalView(cloud, x, radius) if radius > 0 else None
    for k, g in zip(ks, grids):
        if isinstance(g, Exception):
            out.append(PIDProfile(int(x), np.empty(0), np.empty(0, dtype=np.int64), k, error=str(g)))
            continue
        try:
            out.append(compute_pid(cloud, x, g, max_search_dim, use_threshold, k, view, cascade))
        except (ValueError, OverflowError) as exc:
            out.append(PIDProfile(int(x), np.empty(0), np.empty(0, dtype=np.int64), k, error=str(exc)))
    return out


def pid_batch(cloud: PointCloud, query_ids, k_list=(50,), steps: int = DEFAULT_STEPS,
              max_search_dim: int = DEFAULT_MAX_SEARCH_DIM, use_threshold: bool = True,
              threads: int = 1, progress=None, cascade: str = "filtered") -> list[PIDProfile]:
    """Profiles for every query point and every k, ordered by query then k.

    Failures are recorded on the profile (``error``) and never stop the batch.
    """
    ids = [cloud._check(i) for i in query_ids]
    ks = [int(k) for k in k_list]
    task = lambda x: _pid_task(cloud, x, ks, steps, max_search_dim, use_threshold, cascade)
    results = []
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        for done, profiles in enumerate(pool.map(task, ids), start=1):
            results.extend(profiles)
            if progress is not None:
                progress(done, len(ids))
    return results


def mean_pid(profiles: list[PIDProfile]) -> dict[int, float]:
    """Average of the per-k aggregates for each point (failed profiles skipped)."""
    sums: dict[int, list[float]] = {}
    for p in profiles:
        if p.error is None:
            sums.setdefault(p.point, []).append(p.aggregate)
    return {pt: float(np.mean(v)) if v else math.nan for pt, v in sums.items()}
