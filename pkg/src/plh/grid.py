"""Annulus parameter grids and per-point local neighbourhoods."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .persistence import BarcodeSet, barcodes_from_arrays, _check_key_range
from .pointcloud import MEMBERSHIP_RTOL, PointCloud, PointCloudError, distance_matrix, knn_distances
from . import _rips

DEFAULT_K = 50
DEFAULT_STEPS = 20
#: the VR filtration of a cell is capped at this multiple of its outer radius
CAP_FACTOR = 2.0


@dataclass(frozen=True)
class ParameterGrid:
    """Inner radii ``r_values`` by outer radii ``s_values``; cells need r < s."""

    r_values: np.ndarray
    s_values: np.ndarray
    cap_factor: float = CAP_FACTOR

    def __post_init__(self):
        r = np.asarray(self.r_values, dtype=np.float64).ravel()
        s = np.asarray(self.s_values, dtype=np.float64).ravel()
        if r.size == 0 or s.size == 0:
            raise ValueError("grid axes must be nonempty")
        if np.any(r < 0) or np.any(np.diff(r) < 0) or np.any(np.diff(s) < 0):
            raise ValueError("grid axes must be non-negative and ascending")
        object.__setattr__(self, "r_values", r)
        object.__setattr__(self, "s_values", s)

    @classmethod
    def single(cls, r: float, s: float) -> "ParameterGrid":
        return cls(np.array([r]), np.array([s]))

    @property
    def r_min(self) -> float:
        return float(self.r_values[0])

    @property
    def r_max(self) -> float:
        return float(self.r_values[-1])

    @property
    def s_min(self) -> float:
        return float(self.s_values[0])

    @property
    def s_max(self) -> float:
        return float(self.s_values[-1])

    @property
    def steps(self) -> int:
        return len(self.s_values)

    @property
    def vr_cap(self) -> float:
        return self.cap_factor * self.s_max

    def cap(self, s: float) -> float:
        return self.cap_factor * s

    @property
    def pairs(self) -> list[tuple[float, float]]:
        """All admissible ``(r, s)``, ordered by s then r."""
        return [(float(r), float(s)) for s in self.s_values for r in self.r_values if r < s]

    @property
    def cells(self) -> list[tuple[int, int]]:
        """Admissible ``(r_index, s_index)`` in the same order as :attr:`pairs`."""
        return [(i, j) for j, s in enumerate(self.s_values)
                for i, r in enumerate(self.r_values) if r < s]

    def __len__(self) -> int:
        return len(self.cells)

    def scaled(self, factor: float) -> "ParameterGrid":
        return ParameterGrid(self.r_values * factor, self.s_values * factor, self.cap_factor)


def grid_from_knn(cloud: PointCloud, x: int, k: int = DEFAULT_K, steps: int = DEFAULT_STEPS) -> ParameterGrid:
    """Grid driven by the k-NN distances of ``x``.

    ``s_max`` is the distance to the k-th neighbour and ``r_min`` the smallest
    nonzero neighbour distance; ``r_max`` and ``s_min`` share the distance to
    the ``k // 3``-th neighbour.  Each axis gets ``steps`` evenly spaced values.
    """
    if steps < 2:
        raise ValueError("steps must be at least 2")
    d = knn_distances(cloud, x, k)
    nonzero = d[d > 0]
    if nonzero.size == 0:
        raise PointCloudError(f"point {x}: all {k} nearest neighbours coincide with it")
    r_min = float(nonzero[0])
    mid = max(float(d[max(k // 3, 1) - 1]), r_min)
    s_max = float(d[-1])
    return ParameterGrid(np.linspace(r_min, mid, steps), np.linspace(mid, s_max, steps))


class LocalView:
    """Neighbours of one point within a radius, sorted by distance.

    Every annulus around the centre is then a contiguous slice of this list,
    and persistence of a slice only needs the local distance matrix.
    """

    def __init__(self, cloud: PointCloud, x: int, radius: float):
        self.cloud = cloud
        self.center = int(x)
        self.ids, self.dist = cloud.neighbours_within(x, radius)
        self.distances = distance_matrix(cloud.points[self.ids])

    def span(self, r: float, s: float) -> tuple[int, int]:
        lo = np.searchsorted(self.dist, r * (1.0 - MEMBERSHIP_RTOL), side="left")
        hi = np.searchsorted(self.dist, s * (1.0 + MEMBERSHIP_RTOL), side="right")
        return int(lo), int(max(hi, lo))

    def members(self, r: float, s: float) -> np.ndarray:
        a, b = self.span(r, s)
        return np.sort(self.ids[a:b])

    def block(self, a: int, b: int) -> np.ndarray:
        return np.ascontiguousarray(self.distances[a:b, a:b])


def raw_barcode(distances: np.ndarray, max_degree: int, cap: float = math.inf):
    """``(degree, birth, death)`` arrays from the implicit engine."""
    distances = np.ascontiguousarray(distances, dtype=np.float64)
    _check_key_range(distances.shape[0], max_degree)
    return _rips.rips_barcode(distances, int(max_degree), float(cap))


CASCADES = ("filtered", "raw")


def thresholded_lifetimes(deg, birth, death, max_degree: int,
                          cascade: str = "filtered") -> list[np.ndarray]:
    """Per degree, the mask of intervals surviving the lifetime threshold.

    Degree d keeps intervals at least as long as the longest finite interval
    of degree d - 1.  With ``cascade="filtered"`` that maximum is taken over
    the already thresholded degree d - 1 (an empty one gives threshold 0);
    ``"raw"`` takes it over the unfiltered degree d - 1 and is kept for
    diagnostics.
    """
    if cascade not in CASCADES:
        raise ValueError(f"unknown cascade {cascade!r}")
    life = death - birth
    keep = []
    threshold = 0.0
    for d in range(max_degree + 1):
        in_deg = deg == d
        mask = in_deg & (life >= threshold) if d > 0 else in_deg
        keep.append(mask)
        source = mask if cascade == "filtered" else in_deg
        finite = life[source & np.isfinite(life)]
        threshold = float(finite.max()) if finite.size else 0.0
    return keep


def thresholded_diagram(deg, birth, death, degree: int, cascade: str = "filtered") -> np.ndarray:
    mask = thresholded_lifetimes(deg, birth, death, degree, cascade)[degree]
    return np.column_stack((birth[mask], death[mask]))


def barcode_set(deg, birth, death, max_degree: int) -> BarcodeSet:
    return barcodes_from_arrays(deg, birth, death, max_degree)
