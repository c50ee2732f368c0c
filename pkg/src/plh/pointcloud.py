"""Point clouds, metric queries and intrinsic annuli."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit
from scipy.spatial import cKDTree

#: relative slack applied to both annulus bounds to absorb round-off
MEMBERSHIP_RTOL = 1e-12


class PointCloudError(ValueError):
    """Raised for malformed point-cloud input or invalid queries."""


@njit(cache=True, nogil=True)
def _distances_to(points, center):
    n, dim = points.shape
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        acc = 0.0
        for k in range(dim):
            diff = points[i, k] - center[k]
            acc += diff * diff
        out[i] = np.sqrt(acc)
    return out


@njit(cache=True, nogil=True)
def _distance_matrix(points):
    n, dim = points.shape
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(dim):
                diff = points[i, k] - points[j, k]
                acc += diff * diff
            out[i, j] = out[j, i] = np.sqrt(acc)
    return out


def distance_matrix(points: np.ndarray) -> np.ndarray:
    """Euclidean distance matrix, bit-identical to :func:`pairwise_distance`."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise PointCloudError("expected a 2-D array of points")
    return _distance_matrix(points)


def distances_to(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    points = np.ascontiguousarray(points, dtype=np.float64)
    center = np.ascontiguousarray(center, dtype=np.float64)
    return _distances_to(points, center)


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Finite subset of R^N with the Euclidean metric.

    The coordinate array is made read-only on construction so the cloud can be
    shared between worker threads.
    """

    points: np.ndarray
    _tree: cKDTree | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise PointCloudError("points must be an (n, N) array with N >= 1")
        if pts.shape[0] < 1:
            raise PointCloudError("a point cloud needs at least one point")
        bad = ~np.isfinite(pts)
        if bad.any():
            row, col = np.argwhere(bad)[0]
            raise PointCloudError(f"non-finite coordinate at row {row + 1}, column {col + 1}")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def tree(self) -> cKDTree:
        if self._tree is None:
            object.__setattr__(self, "_tree", cKDTree(self.points))
        return self._tree

    def _check(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < len(self):
            raise PointCloudError(f"point index {i} out of range for {len(self)} points")
        return i

    def distances_from(self, x: int) -> np.ndarray:
        """Distances from point ``x`` to every point (including itself)."""
        x = self._check(x)
        return _distances_to(self.points, self.points[x])

    def neighbours_within(self, x: int, radius: float) -> tuple[np.ndarray, np.ndarray]:
        """Ids and distances of all points within ``radius`` of ``x``.

        Sorted by distance, ties by id.  The k-d tree only proposes
        candidates; membership is decided on exact distances.
        """
        x = self._check(x)
        slack = radius * (1.0 + 4 * MEMBERSHIP_RTOL) + 1e-300
        ids = np.asarray(self.tree.query_ball_point(self.points[x], slack), dtype=np.int64)
        ids.sort()
        dist = _distances_to(self.points[ids], self.points[x])
        keep = dist <= radius * (1.0 + MEMBERSHIP_RTOL)
        ids, dist = ids[keep], dist[keep]
        order = np.lexsort((ids, dist))
        return ids[order], dist[order]


def load_point_cloud(path, format: str = "csv", dim: int | None = None,
                     skip_header: bool = False) -> PointCloud:
    """Read a point cloud from CSV (one point per row) or raw little-endian f64."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if format == "raw-f64":
        if dim is None or dim < 1:
            raise PointCloudError("raw-f64 input needs the dimension")
        data = np.fromfile(path, dtype="<f8")
        if data.size == 0 or data.size % dim:
            raise PointCloudError(f"{data.size} values do not form rows of dimension {dim}")
        data = data.reshape(-1, dim)
        bad = ~np.isfinite(data)
        if bad.any():
            row, col = np.argwhere(bad)[0]
            raise PointCloudError(f"non-finite value at row {row + 1}, column {col + 1}")
        return PointCloud(data)
    if format != "csv":
        raise PointCloudError(f"unknown format {format!r}")

    rows = []
    arity = None
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if skip_header and lineno == 1:
                continue
            if not row or all(not cell.strip() for cell in row):
                continue
            if arity is None:
                arity = len(row)
            elif len(row) != arity:
                raise PointCloudError(f"row {lineno} has {len(row)} values, expected {arity}")
            values = []
            for col, cell in enumerate(row, start=1):
                try:
                    value = float(cell)
                except ValueError:
                    raise PointCloudError(f"cannot parse {cell!r} at row {lineno}, column {col}") from None
                if not np.isfinite(value):
                    raise PointCloudError(f"non-finite value at row {lineno}, column {col}")
                values.append(value)
            rows.append(values)
    if not rows:
        raise PointCloudError(f"{path} contains no points")
    return PointCloud(np.asarray(rows))


def save_point_cloud(cloud: PointCloud | np.ndarray, path) -> None:
    points = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud)
    np.savetxt(path, points, delimiter=",", fmt="%.17g")


def pairwise_distance(cloud: PointCloud, i: int, j: int) -> float:
    i, j = cloud._check(i), cloud._check(j)
    return float(_distances_to(cloud.points[i:i + 1], cloud.points[j])[0])


def knn_distances(cloud: PointCloud, x: int, k: int) -> np.ndarray:
    """Ascending distances to the ``k`` nearest points other than ``x``."""
    k = int(k)
    if k < 1 or k >= len(cloud):
        raise PointCloudError(f"k={k} must satisfy 1 <= k < {len(cloud)}")
    x = cloud._check(x)
    if len(cloud) > 2048:
        # the tree query is only used to bound the radius
        d, _ = cloud.tree.query(cloud.points[x], k=k + 1)
        ids, dist = cloud.neighbours_within(x, float(d[-1]))
    else:
        dist = cloud.distances_from(x)
        ids = np.arange(len(cloud))
        order = np.lexsort((ids, dist))
        ids, dist = ids[order], dist[order]
    mask = ids != x
    return dist[mask][:k].copy()


@dataclass(frozen=True)
class AnnulusSelection:
    center_index: int
    inner_radius: float
    outer_radius: float
    member_indices: np.ndarray

    def __len__(self) -> int:
        return len(self.member_indices)


def in_annulus(dist, r: float, s: float):
    """Closed-interval membership ``r <= d <= s`` with relative slack."""
    return (dist >= r * (1.0 - MEMBERSHIP_RTOL)) & (dist <= s * (1.0 + MEMBERSHIP_RTOL))


def extract_annulus(cloud: PointCloud, x: int, r: float, s: float) -> AnnulusSelection:
    """All points ``y`` with ``r <= d(x, y) <= s``, ascending by id."""
    if r < 0:
        raise PointCloudError(f"inner radius {r} is negative")
    if r > s:
        raise PointCloudError(f"inner radius {r} exceeds outer radius {s}")
    x = cloud._check(x)
    dist = cloud.distances_from(x)
    members = np.flatnonzero(in_annulus(dist, r, s))
    return AnnulusSelection(x, float(r), float(s), members)
