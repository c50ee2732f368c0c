"""Explicit Vietoris-Rips filtrations.

The filtration parameter is the simplex *diameter*: an edge enters at the
distance between its endpoints, a higher simplex at its longest edge.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .pointcloud import PointCloud, distance_matrix

DEFAULT_SIMPLEX_LIMIT = 50_000_000


class SimplexLimitExceeded(RuntimeError):
    """The complex would exceed the configured simplex budget."""


class Simplex(NamedTuple):
    vertices: tuple[int, ...]
    value: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


def sort_key(simplex: Simplex):
    return (simplex.value, len(simplex.vertices), simplex.vertices)


@dataclass(frozen=True)
class Filtration:
    """Simplices in filtration order: by value, then dimension, then vertices."""

    simplices: tuple[Simplex, ...]
    max_dim: int
    diameter_cap: float = math.inf

    @classmethod
    def from_simplices(cls, simplices, max_dim=None, diameter_cap=math.inf) -> "Filtration":
        ordered = tuple(sorted((Simplex(tuple(v), float(t)) for v, t in simplices), key=sort_key))
        if max_dim is None:
            max_dim = max((s.dim for s in ordered), default=0)
        return cls(ordered, max_dim, diameter_cap)

    def __len__(self) -> int:
        return len(self.simplices)

    def __iter__(self):
        return iter(self.simplices)

    def index(self) -> dict[tuple[int, ...], int]:
        return {s.vertices: i for i, s in enumerate(self.simplices)}

    def check(self) -> None:
        """Raise ``ValueError`` unless every face precedes its cofaces."""
        position = self.index()
        for i, s in enumerate(self.simplices):
            if s.value > self.diameter_cap:
                raise ValueError(f"simplex {s.vertices} exceeds the cap")
            if s.dim == 0:
                continue
            for k in range(len(s.vertices)):
                face = s.vertices[:k] + s.vertices[k + 1:]
                j = position.get(face)
                if j is None or j >= i:
                    raise ValueError(f"face {face} of {s.vertices} missing or out of order")


def _as_distances(points) -> np.ndarray:
    if isinstance(points, PointCloud):
        return distance_matrix(points.points)
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    return distance_matrix(points)


def build_vietoris_rips(points, max_dim: int, diameter_cap: float = math.inf,
                        distances: np.ndarray | None = None,
                        limit: int = DEFAULT_SIMPLEX_LIMIT) -> Filtration:
    """All simplices of dimension <= ``max_dim`` with diameter <= ``diameter_cap``.

    Cliques are grown only through neighbours within the cap, so the cost
    scales with the size of the complex rather than with all vertex subsets.
    """
    if max_dim < 0:
        raise ValueError("max_dim must be non-negative")
    if not diameter_cap > 0:
        raise ValueError("diameter_cap must be positive")
    dist = _as_distances(points) if distances is None else np.asarray(distances, dtype=np.float64)
    n = dist.shape[0]
    if n == 0:
        raise ValueError("empty point set")

    upper = [np.flatnonzero(dist[i, i + 1:] <= diameter_cap) + i + 1 for i in range(n)]
    simplices: list[Simplex] = []

    def grow(vertices, candidates, value):
        if len(simplices) >= limit:
            raise SimplexLimitExceeded(f"more than {limit} simplices")
        simplices.append(Simplex(vertices, value))
        if len(vertices) > max_dim:
            return
        for w in candidates:
            w = int(w)
            row = dist[w]
            new_value = value
            for v in vertices:
                if row[v] > new_value:
                    new_value = float(row[v])
            grow(vertices + (w,), [u for u in candidates if u > w and dist[w, u] <= diameter_cap], new_value)

    for i in range(n):
        grow((i,), upper[i], 0.0)
    simplices.sort(key=sort_key)
    return Filtration(tuple(simplices), max_dim, diameter_cap)


def simplex_count(f: Filtration) -> list[int]:
    """Number of simplices per dimension, up to the top populated dimension."""
    counts = [0] * (f.max_dim + 1)
    for s in f.simplices:
        counts[s.dim] += 1
    while len(counts) > 1 and counts[-1] == 0:
        counts.pop()
    return counts
