"""Uniform samples from Euclidean annuli, with seeded counter-based RNG."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: identifier of the bit generator, written into every output artifact
RNG_ALGORITHM = "numpy.Philox4x64-10"


def derive_seed(global_seed: int, point_id: int = 0, draw: int = 0) -> int:
    """64-bit seed for one (point, draw) pair, independent of scheduling."""
    ss = np.random.SeedSequence([int(global_seed), int(point_id), int(draw)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class EuclideanAnnulusSample:
    intrinsic_dim: int
    r: float
    s: float
    points: np.ndarray
    seed: int

    @property
    def center(self) -> np.ndarray:
        return np.zeros(self.intrinsic_dim)

    def __len__(self) -> int:
        return len(self.points)


def _directions(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    g = rng.standard_normal((count, n))
    norms = np.linalg.norm(g, axis=1)
    # a zero vector has no direction; redraw (practically never happens)
    while np.any(norms == 0):
        bad = norms == 0
        g[bad] = rng.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(g, axis=1)
    return g / norms[:, None]


def _radii(rng: np.random.Generator, count: int, n: int, bands) -> np.ndarray:
    """Radii uniform in volume over a union of radial bands ``[(lo, hi), ...]``.

    Volume in R^n grows like rho^n, so rho^n is drawn uniformly from the union
    of ``[lo^n, hi^n]``.  Radii are scaled by the outermost bound first to keep
    the powers well conditioned.
    """
    scale = max(hi for _, hi in bands)
    if scale == 0:
        return np.zeros(count)
    lows = np.array([(lo / scale) ** n for lo, _ in bands])
    highs = np.array([(hi / scale) ** n for _, hi in bands])
    widths = highs - lows
    total = widths.sum()
    u = rng.random(count)
    if total == 0:
        return np.full(count, bands[0][0])
    v = u * total
    edges = np.cumsum(widths)
    band = np.minimum(np.searchsorted(edges, v, side="right"), len(bands) - 1)
    start = edges[band] - widths[band]
    power = lows[band] + (v - start)
    radius = scale * np.power(power, 1.0 / n)
    # round-off must not leave the band
    bounds = np.asarray(bands, dtype=np.float64)
    return np.clip(radius, bounds[band, 0], bounds[band, 1])


def sample_annulus(n: int, r: float, s: float, count: int, seed: int | None = None,
                   rng: np.random.Generator | None = None) -> EuclideanAnnulusSample:
    """``count`` i.i.d. uniform points of ``{y in R^n : r <= |y| <= s}``."""
    if n < 1:
        raise ValueError("dimension must be at least 1")
    if r < 0 or r > s or s <= 0:
        raise ValueError(f"invalid radii r={r}, s={s}")
    if count < 0:
        raise ValueError("count must be non-negative")
    if rng is None:
        seed = 0 if seed is None else int(seed)
        rng = make_rng(seed)
    dirs = _directions(rng, count, n)
    rho = _radii(rng, count, n, [(r, s)])
    points = dirs * rho[:, None]
    return EuclideanAnnulusSample(n, float(r), float(s), points, int(seed or 0))


def extend_annulus(base: EuclideanAnnulusSample, r: float, s: float, new_count: int,
                   rng: np.random.Generator | None = None) -> EuclideanAnnulusSample:
    """Grow ``base`` to the annulus ``[r, s]`` with ``new_count`` points in total.

    The original points are kept as a prefix; the additional ones are drawn
    from the two radial bands ``[r, base.r]`` and ``[base.s, s]`` in
    proportion to their volumes.
    """
    if r > base.r or s < base.s or r < 0:
        raise ValueError(f"cannot shrink annulus [{base.r}, {base.s}] to [{r}, {s}]")
    if new_count < len(base):
        raise ValueError(f"new_count {new_count} is below the current {len(base)} points")
    extra = new_count - len(base)
    if extra == 0 and r == base.r and s == base.s:
        return base
    if rng is None:
        rng = make_rng(derive_seed(base.seed, len(base), new_count))
    n = base.intrinsic_dim
    bands = [(r, base.r), (base.s, s)]
    if all(hi <= lo for lo, hi in bands):
        # nothing new to cover: draw from the annulus itself
        bands = [(r, s)]
    dirs = _directions(rng, extra, n)
    rho = _radii(rng, extra, n, bands)
    points = np.vstack([base.points, dirs * rho[:, None]])
    return EuclideanAnnulusSample(n, float(r), float(s), points, base.seed)
