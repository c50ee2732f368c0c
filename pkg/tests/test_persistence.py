from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plh.persistence import (BarcodeSet, PersistenceDiagram, apply_lifetime_threshold, boundary_columns,
                             compute_persistence, diagrams_from_json, diagrams_to_json,
                             has_nontrivial_ph, reduce_textbook, reduce_twist, rips_persistence)
from plh.pointcloud import distance_matrix
from plh.vr import build_vietoris_rips, simplex_count
from oracles import brute_simplices, dense_persistence


def _as_lists(b: BarcodeSet):
    return {d: [tuple(x) for x in b[d].intervals.tolist()] for d in b.diagrams}


def test_single_point():
    b = compute_persistence(build_vietoris_rips([[0.0, 0.0]], 1))
    assert _as_lists(b) == {0: [(0.0, math.inf)]}


def test_unit_square():
    square = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    b = compute_persistence(build_vietoris_rips(square, 2, 2.0))
    want = dense_persistence(brute_simplices(distance_matrix(square), 2, 2.0), 1)
    assert _as_lists(b) == want
    assert want[0] == [(0.0, 1.0)] * 3 + [(0.0, math.inf)]
    assert want[1] == [(1.0, math.sqrt(2.0))]


def test_circle_dominant_bar():
    t = np.linspace(0, 2 * np.pi, 60, endpoint=False)
    pts = np.column_stack([np.cos(t), np.sin(t)])
    b = compute_persistence(build_vietoris_rips(pts, 2))
    life = np.sort(b[1].lifetimes)
    assert life.size >= 1
    assert all(life[-1] > 10 * other for other in life[:-1])
    assert has_nontrivial_ph(b, 1)


def test_degrees_emitted():
    pts = np.random.default_rng(0).random((6, 2))
    assert sorted(compute_persistence(build_vietoris_rips(pts, 3)).diagrams) == [0, 1, 2]


def _random_small_filtration(rng):
    n = int(rng.integers(2, 8))
    pts = rng.random((n, int(rng.integers(1, 4))))
    if rng.random() < 0.3:
        pts = np.round(pts, 1)  # plenty of ties
    dist = distance_matrix(pts)
    max_dim = int(rng.integers(1, 4))
    cap = math.inf if rng.random() < 0.5 else float(np.quantile(dist, 0.6)) or math.inf
    f = build_vietoris_rips(None, max_dim, cap, distances=dist)
    return f, dist


def test_twist_matches_textbook_and_dense_oracle():
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 100:
        f, _ = _random_small_filtration(rng)
        if len(f) > 64:
            continue
        checked += 1
        twist = compute_persistence(f, "twist")
        text = compute_persistence(f, "textbook")
        dense = dense_persistence([(s.vertices, s.value) for s in f], max(f.max_dim - 1, 0))
        assert _as_lists(twist) == _as_lists(text) == dense


def test_reductions_share_pairs():
    f = build_vietoris_rips(np.random.default_rng(1).random((7, 2)), 2)
    cols = boundary_columns(f)
    a = reduce_textbook(cols)
    b = reduce_twist(cols, [s.dim for s in f])
    # twist skips cleared columns, so compare the pairing itself
    assert a == b


def test_euler_consistency():
    rng = np.random.default_rng(5)
    for _ in range(10):
        pts = rng.random((int(rng.integers(3, 9)), 2))
        f = build_vietoris_rips(pts, 3)
        b = compute_persistence(f, include_top=True)
        for t in rng.random(20) * 1.5:
            chi = sum((-1) ** s.dim for s in f if s.value <= t)
            betti = sum((-1) ** d * int(np.sum((iv[:, 0] <= t) & (t < iv[:, 1])))
                        for d, iv in ((d, b[d].intervals) for d in b.diagrams))
            assert chi == betti


def test_engine_matches_explicit():
    rng = np.random.default_rng(21)
    for trial in range(120):
        n = int(rng.integers(2, 13))
        pts = rng.normal(size=(n, int(rng.integers(1, 4))))
        if trial % 3 == 0:
            pts = np.round(pts)
        dist = distance_matrix(pts)
        deg = int(rng.integers(0, 3)) if n > 9 else int(rng.integers(0, 4))
        cap = math.inf if trial % 2 else float(np.quantile(dist, 0.7)) or math.inf
        a = rips_persistence(dist, deg, cap)
        b = rips_persistence(dist, deg, cap, engine="explicit")
        assert _as_lists(a) == _as_lists(b)


def test_engine_overflow_guard():
    with pytest.raises(OverflowError):
        rips_persistence(np.zeros((5000, 5000)), 4)


def _bs(*diagrams):
    return BarcodeSet({d: PersistenceDiagram(d, iv) for d, iv in enumerate(diagrams)})


def test_threshold_examples():
    b = _bs([(0, 2.0), (0, math.inf)], [(0, 0.5), (1, 4)])
    out = apply_lifetime_threshold(b)
    assert out[1].intervals.tolist() == [[1, 4]]
    assert out[0].intervals.tolist() == b[0].intervals.tolist()
    keep = _bs([(0, 1.0)], [(0, 3), (1, 4)])
    assert apply_lifetime_threshold(keep)[1].intervals.tolist() == [[0, 3], [1, 4]]
    cascade = _bs([(0, 5.0)], [(0, 1)], [(0, 0.1), (2, 2.05)])
    out = apply_lifetime_threshold(cascade)
    assert len(out[1]) == 0
    assert out[2].intervals.tolist() == cascade[2].intervals.tolist()
    with pytest.raises(ValueError):
        apply_lifetime_threshold(BarcodeSet({1: PersistenceDiagram(1)}))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 5), st.floats(0, 5)), max_size=6),
       st.lists(st.tuples(st.floats(0, 5), st.floats(0, 5)), max_size=6))
def test_threshold_only_removes(d0, d1):
    iv0 = [(min(a, b), max(a, b)) for a, b in d0]
    iv1 = [(min(a, b), max(a, b)) for a, b in d1]
    b = _bs(iv0, iv1)
    out = apply_lifetime_threshold(b)
    assert len(out[1]) <= len(b[1])
    if has_nontrivial_ph(out, 1):
        assert has_nontrivial_ph(b, 1)


def test_nontrivial_examples():
    assert not has_nontrivial_ph(_bs([(0, math.inf)], []), 1)
    assert not has_nontrivial_ph(_bs([(0, math.inf)], [(1.0, 1.0)]), 1)
    assert has_nontrivial_ph(_bs([(0, math.inf)], [(1.0, 1.5)]), 1)
    assert not has_nontrivial_ph(_bs([(0, math.inf)]), 0, reduced=True)
    assert has_nontrivial_ph(_bs([(0, 1.0), (0, math.inf)]), 0, reduced=True)
    with pytest.raises(ValueError):
        has_nontrivial_ph(_bs([(0, 1.0)]), 3)


def test_json_round_trip():
    b = _bs([(0, 1.5), (0, math.inf)], [(0.25, 2.0)])
    text = diagrams_to_json(b)
    assert '"inf"' in text
    back = diagrams_from_json(text)
    for d in (0, 1):
        assert back[d].intervals.tolist() == b[d].intervals.tolist()
