"""Persistent homology over Z/2 by boundary-matrix reduction."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _rips
from .vr import Filtration, build_vietoris_rips


@dataclass(frozen=True)
class PersistenceDiagram:
    """Intervals ``(birth, death)`` of one homology degree; ``death`` may be inf."""

    degree: int
    intervals: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))

    def __post_init__(self):
        arr = np.asarray(self.intervals, dtype=np.float64).reshape(-1, 2)
        object.__setattr__(self, "intervals", arr)

    def __len__(self) -> int:
        return len(self.intervals)

    @property
    def lifetimes(self) -> np.ndarray:
        return self.intervals[:, 1] - self.intervals[:, 0]

    @property
    def finite(self) -> np.ndarray:
        return self.intervals[np.isfinite(self.intervals[:, 1])]

    @property
    def essential(self) -> np.ndarray:
        return self.intervals[~np.isfinite(self.intervals[:, 1]), 0]

    def sorted(self) -> "PersistenceDiagram":
        order = np.lexsort((self.intervals[:, 1], self.intervals[:, 0]))
        return PersistenceDiagram(self.degree, self.intervals[order])


@dataclass(frozen=True)
class BarcodeSet:
    """Diagrams for degrees ``0..max_degree``."""

    diagrams: dict[int, PersistenceDiagram]

    @property
    def max_degree(self) -> int:
        return max(self.diagrams)

    def __getitem__(self, degree: int) -> PersistenceDiagram:
        return self.diagrams[degree]

    def __contains__(self, degree) -> bool:
        return degree in self.diagrams


def boundary_columns(f: Filtration) -> list[list[int]]:
    """Sorted row indices of each boundary column, in filtration order."""
    position = f.index()
    columns = []
    for s in f.simplices:
        if s.dim == 0:
            columns.append([])
            continue
        rows = [position[s.vertices[:k] + s.vertices[k + 1:]] for k in range(len(s.vertices))]
        columns.append(sorted(rows))
    return columns


def reduce_textbook(columns: list[list[int]]) -> dict[int, int]:
    """Left-to-right column reduction; returns ``{death_column: birth_row}``.

    No clearing and no shortcuts.  Serves as the reference for
    :func:`reduce_twist`.
    """
    reduced = [set(c) for c in columns]
    low_to_col: dict[int, int] = {}
    pairs = {}
    for j, col in enumerate(reduced):
        while col:
            low = max(col)
            other = low_to_col.get(low)
            if other is None:
                low_to_col[low] = j
                pairs[j] = low
                break
            col ^= reduced[other]
    return pairs


def reduce_twist(columns: list[list[int]], dims: list[int]) -> dict[int, int]:
    """Column reduction with clearing, processing dimensions top-down."""
    reduced: list[set | None] = [None] * len(columns)
    low_to_col: dict[int, int] = {}
    cleared = bytearray(len(columns))
    pairs = {}
    by_dim: dict[int, list[int]] = {}
    for j, d in enumerate(dims):
        by_dim.setdefault(d, []).append(j)
    for d in sorted(by_dim, reverse=True):
        if d == 0:
            continue
        for j in by_dim[d]:
            if cleared[j]:
                continue
            col = set(columns[j])
            while col:
                low = max(col)
                other = low_to_col.get(low)
                if other is None:
                    low_to_col[low] = j
                    pairs[j] = low
                    # a positive simplex reduces to zero: skip its column later
                    cleared[low] = 1
                    break
                col ^= reduced[other]
            reduced[j] = col
    return pairs


def _diagrams_from_pairs(f: Filtration, pairs: dict[int, int], top: int) -> BarcodeSet:
    values = [s.value for s in f.simplices]
    dims = [s.dim for s in f.simplices]
    births = set(pairs.values())
    intervals: dict[int, list] = {d: [] for d in range(top + 1)}
    for death, birth in pairs.items():
        d = dims[birth]
        if d <= top and values[death] > values[birth]:
            intervals[d].append((values[birth], values[death]))
    for j in range(len(values)):
        if j in pairs or j in births:
            continue
        d = dims[j]
        if d <= top:
            intervals[d].append((values[j], math.inf))
    return BarcodeSet({d: PersistenceDiagram(d, sorted(v)).sorted() for d, v in intervals.items()})


def compute_persistence(f: Filtration, method: str = "twist", include_top: bool = False) -> BarcodeSet:
    """Persistence diagrams of a filtration.

    Degrees ``0..max_dim-1`` are emitted; the top degree has no cofaces to
    kill its classes and is only included with ``include_top``.
    Zero-length intervals are dropped.
    """
    columns = boundary_columns(f)
    if method == "twist":
        pairs = reduce_twist(columns, [s.dim for s in f.simplices])
    elif method == "textbook":
        pairs = reduce_textbook(columns)
    else:
        raise ValueError(f"unknown reduction method {method!r}")
    top = f.max_dim if include_top else max(f.max_dim - 1, 0)
    return _diagrams_from_pairs(f, pairs, top)


def rips_persistence(distances: np.ndarray, max_degree: int, cap: float = math.inf,
                     engine: str = "implicit") -> BarcodeSet:
    """Vietoris-Rips diagrams of degrees ``0..max_degree`` from a distance matrix.

    ``engine="implicit"`` uses the cohomology kernel in :mod:`plh._rips`;
    ``"explicit"`` builds the filtration and reduces its boundary matrix.
    """
    distances = np.ascontiguousarray(distances, dtype=np.float64)
    if engine == "explicit":
        f = build_vietoris_rips(None, max_degree + 1, cap if cap > 0 else math.inf, distances=distances)
        return compute_persistence(f)
    if engine != "implicit":
        raise ValueError(f"unknown engine {engine!r}")
    m = distances.shape[0]
    _check_key_range(m, max_degree)
    deg, birth, death = _rips.rips_barcode(distances, int(max_degree), float(cap))
    return barcodes_from_arrays(deg, birth, death, max_degree)


def _check_key_range(m: int, max_degree: int) -> None:
    # simplex keys are rank * C(m, d + 2) + index and must fit in int64
    if (m * (m - 1) // 2 + 1) * math.comb(m, max_degree + 2) >= 2**63:
        raise OverflowError(f"{m} points are too many for degree {max_degree}")


def barcodes_from_arrays(deg, birth, death, max_degree: int) -> BarcodeSet:
    diagrams = {}
    for d in range(max_degree + 1):
        mask = deg == d
        pts = np.column_stack((birth[mask], death[mask]))
        diagrams[d] = PersistenceDiagram(d, pts).sorted()
    return BarcodeSet(diagrams)


def _max_finite_lifetime(diagram: PersistenceDiagram) -> float:
    life = diagram.lifetimes
    life = life[np.isfinite(life)]
    return float(life.max()) if life.size else 0.0


def apply_lifetime_threshold(b: BarcodeSet) -> BarcodeSet:
    """Drop features shorter than the longest feature one degree below.

    Degree 0 passes through.  Each degree is compared with the already
    filtered degree beneath it; infinite lifetimes never set the threshold and
    an empty lower degree imposes none.
    """
    if 0 not in b:
        raise ValueError("degree 0 is required")
    out = {0: b[0]}
    for d in range(1, b.max_degree + 1):
        threshold = _max_finite_lifetime(out[d - 1])
        diagram = b[d]
        keep = diagram.lifetimes >= threshold
        out[d] = PersistenceDiagram(d, diagram.intervals[keep])
    return BarcodeSet(out)


def has_nontrivial_ph(b: BarcodeSet, degree: int, reduced: bool = False) -> bool:
    """Whether the diagram of ``degree`` carries a feature of positive persistence.

    With ``reduced``, degree 0 only counts when there are at least two
    intervals, i.e. the complex is not connected at some scale.
    """
    if degree not in b:
        raise ValueError(f"degree {degree} was not computed")
    diagram = b[degree]
    positive = int(np.count_nonzero(diagram.lifetimes > 0))
    if reduced and degree == 0:
        return positive >= 2
    return positive > 0


def diagrams_to_json(diagrams) -> str:
    """Serialise diagrams as a JSON array of ``{degree, birth, death}``."""
    if isinstance(diagrams, BarcodeSet):
        diagrams = [diagrams[d] for d in sorted(diagrams.diagrams)]
    elif isinstance(diagrams, PersistenceDiagram):
        diagrams = [diagrams]
    records = []
    for diagram in diagrams:
        for birth, death in diagram.intervals:
            records.append({
                "degree": int(diagram.degree),
                "birth": float(birth),
                "death": "inf" if math.isinf(death) else float(death),
            })
    return json.dumps(records, indent=1)


def diagrams_from_json(text: str) -> dict[int, PersistenceDiagram]:
    records = json.loads(text)
    grouped: dict[int, list] = {}
    for rec in records:
        death = rec["death"]
        death = math.inf if death in ("inf", "Infinity", None) else float(death)
        grouped.setdefault(int(rec["degree"]), []).append((float(rec["birth"]), death))
    return {d: PersistenceDiagram(d, v) for d, v in grouped.items()}
