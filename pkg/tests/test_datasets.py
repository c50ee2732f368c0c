from __future__ import annotations

import numpy as np
import pytest
from scipy import stats

from plh.datasets import (gen_circle_wedge_sphere, gen_flat_disc, gen_pinched_torus,
                          gen_wedged_spheres, read_labels)


def test_pinched_torus():
    lc = gen_pinched_torus(2000, seed=1)
    pts = lc.points
    assert len(pts) == 2001 and lc.singular_ids == (2000,)
    assert np.all(np.linalg.norm(pts, axis=1) <= 3 + 1e-12)
    assert np.array_equal(pts[2000], [2.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        gen_pinched_torus(10, R=1, r=2)
    assert np.array_equal(gen_pinched_torus(50, seed=3).points, gen_pinched_torus(50, seed=3).points)


def test_wedged_spheres():
    for n in (1, 2, 3):
        lc = gen_wedged_spheres(n, 400, seed=n)
        pts = lc.points
        c1, c2 = np.zeros(n + 1), np.zeros(n + 1)
        c1[0], c2[0] = -1, 1
        d = np.minimum(np.linalg.norm(pts - c1, axis=1), np.linalg.norm(pts - c2, axis=1))
        assert np.all(np.abs(d - 1) <= 1e-12)
        assert np.all(pts[lc.singular_ids[0]] == 0)
        assert np.sum(pts[:, 0] < 0) == 200


def test_circle_wedge_sphere():
    lc = gen_circle_wedge_sphere(seed=2)
    assert len(lc.cloud) == 2001
    circle = lc.strata_labels == 1
    assert np.all(lc.points[circle, 2] == 0.0)
    assert set(np.unique(lc.strata_labels)) == {1, 2}
    assert lc.strata_labels[lc.singular_ids[0]] == 2
    assert np.all(lc.points[lc.singular_ids[0]] == 0)


def test_flat_disc():
    lc = gen_flat_disc(2, 5, 10_000, radius=2.0, seed=4)
    assert np.all(lc.points[:, 2:] == 0)
    rho = np.linalg.norm(lc.points, axis=1)
    assert stats.kstest(rho, lambda r: (r / 2.0) ** 2).statistic < 0.02
    assert lc.singular_ids == ()
    with pytest.raises(ValueError):
        gen_flat_disc(3, 2, 10)


def test_sphere_marginal_uniform():
    # z-coordinate of a uniform point on S^2 is uniform on [-1, 1]
    lc = gen_wedged_spheres(2, 20_000, seed=0)
    right = lc.points[:10_000 * 2][lc.points[:20_000, 0] > 0]
    assert stats.kstest(right[:, 2], "uniform", args=(-1, 2)).statistic < 0.02


def test_labels_round_trip(tmp_path):
    lc = gen_wedged_spheres(1, 10, seed=0)
    lc.save(tmp_path / "c.csv", tmp_path / "c.labels.csv")
    labels, singular = read_labels(tmp_path / "c.labels.csv")
    assert singular == [10] and labels.tolist() == lc.strata_labels.tolist()
