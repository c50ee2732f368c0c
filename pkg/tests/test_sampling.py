from __future__ import annotations

import numpy as np
import pytest
from scipy import stats

from plh.sampling import RNG_ALGORITHM, derive_seed, extend_annulus, sample_annulus


def _radii(sample):
    return np.linalg.norm(sample.points, axis=1)


def test_one_dimensional():
    s = sample_annulus(1, 0.0, 1.0, 1000, seed=4)
    x = s.points[:, 0]
    assert np.all(np.abs(x) <= 1)
    # balanced signs within three standard deviations
    assert abs(np.sum(x > 0) - 500) <= 3 * np.sqrt(250)


def test_empty_and_errors():
    assert len(sample_annulus(3, 0.5, 1.0, 0, seed=1)) == 0
    with pytest.raises(ValueError):
        sample_annulus(2, 2.0, 1.0, 5)
    with pytest.raises(ValueError):
        sample_annulus(0, 0.0, 1.0, 5)


def test_radial_ks():
    s = sample_annulus(2, 1.0, 2.0, 10_000, seed=0)
    ks = stats.kstest(_radii(s), lambda rho: (rho**2 - 1) / 3).statistic
    assert ks < 0.02


def test_membership_and_determinism():
    a = sample_annulus(4, 0.3, 0.7, 500, seed=99)
    b = sample_annulus(4, 0.3, 0.7, 500, seed=99)
    assert np.array_equal(a.points, b.points)
    rho = _radii(a)
    assert np.all(rho >= 0.3 * (1 - 1e-12)) and np.all(rho <= 0.7 * (1 + 1e-12))
    assert not np.array_equal(a.points, sample_annulus(4, 0.3, 0.7, 500, seed=100).points)


def test_rotation_invariance():
    s = sample_annulus(3, 0.5, 1.0, 10_000, seed=8)
    dirs = s.points / _radii(s)[:, None]
    assert np.linalg.norm(dirs.mean(axis=0)) < 5 / np.sqrt(10_000)


def test_extend_noop_and_prefix():
    base = sample_annulus(2, 1.0, 2.0, 100, seed=3)
    assert extend_annulus(base, 1.0, 2.0, 100) is base
    big = extend_annulus(base, 0.5, 2.5, 180)
    assert np.array_equal(big.points[:100], base.points)
    rho = _radii(big)[100:]
    assert np.all(((rho >= 0.5) & (rho <= 1.0)) | ((rho >= 2.0) & (rho <= 2.5)))
    with pytest.raises(ValueError):
        extend_annulus(big, 0.6, 2.5, 200)
    with pytest.raises(ValueError):
        extend_annulus(big, 0.5, 2.5, 10)


def test_extension_union_is_uniform():
    base = sample_annulus(2, 1.0, 2.0, 2500, seed=5)
    count = round(2500 * (2.5**2 - 0.5**2) / (2.0**2 - 1.0**2))
    big = extend_annulus(base, 0.5, 2.5, count)
    ks = stats.kstest(_radii(big), lambda rho: (rho**2 - 0.25) / 6).statistic
    assert ks < 0.02


def test_seed_derivation():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert len({derive_seed(1, p, d) for p in range(20) for d in range(5)}) == 100
    assert RNG_ALGORITHM.startswith("numpy.Philox")
