"""Implicit Vietoris-Rips persistence over Z/2 (numba kernels).

Simplices are never materialised as a filtration list.  A d-simplex is
addressed by its colexicographic index in the combinatorial number system and
ordered by the key ``rank(diameter) * C(m, d+1) + (C(m, d+1) - 1 - index)``,
i.e. by diameter with ties broken by *decreasing* colex index.  Cohomology is
reduced dimension by dimension with clearing, and zero-persistence apparent
pairs are detected without touching the heap.

Barcodes do not depend on how equal filtration values are tie-broken, so the
intervals agree exactly with the explicit route in :mod:`plh.persistence`
(intervals of zero length are never reported).
"""
from __future__ import annotations

import numpy as np
from numba import njit, types
from numba.typed import Dict

_INT64_MAX = np.iinfo(np.int64).max


@njit(cache=True, nogil=True)
def _binomials(n, k):
    table = np.zeros((n + 1, k + 1), dtype=np.int64)
    for i in range(n + 1):
        table[i, 0] = 1
        for j in range(1, min(i, k) + 1):
            table[i, j] = table[i - 1, j - 1] + table[i - 1, j]
    return table


@njit(cache=True, nogil=True)
def _decode(index, dim, top, binom, out):
    # out[0..dim] ascending vertices of the colex-indexed simplex
    hi = top
    for pos in range(dim, -1, -1):
        k = pos + 1
        lo = pos
        # largest v in [lo, hi] with C(v, k) <= index
        while lo < hi:
            mid = (lo + hi + 1) >> 1
            if binom[mid, k] <= index:
                lo = mid
            else:
                hi = mid - 1
        out[pos] = lo
        index -= binom[lo, k]
        hi = lo - 1


@njit(cache=True, nogil=True)
def _simplex_rank(verts, dim, ranks):
    best = 0
    for a in range(dim + 1):
        for b in range(a + 1, dim + 1):
            r = ranks[verts[a], verts[b]]
            if r < 0:
                return -1
            if r > best:
                best = r
    return best


@njit(cache=True, nogil=True)
def _min_cofacet(verts, dim, rho, m, ranks, binom, nb_up, low, high):
    """Key of the smallest cofacet of the simplex, or -1 if it has none."""
    # low[p] = sum_{i<p} C(u_i, i+1); high[p] = sum_{i>=p} C(u_i, i+2)
    low[0] = 0
    for p in range(dim + 1):
        low[p + 1] = low[p] + binom[verts[p], p + 1]
    high[dim + 1] = 0
    for p in range(dim, -1, -1):
        high[p] = high[p + 1] + binom[verts[p], p + 2]
    best = -1
    p = dim + 1
    for w in range(m - 1, -1, -1):
        if p > 0 and verts[p - 1] == w:
            p -= 1
            continue
        r = rho
        ok = True
        for a in range(dim + 1):
            e = ranks[verts[a], w]
            if e < 0:
                ok = False
                break
            if e > r:
                r = e
        if not ok:
            continue
        index = low[p] + binom[w, p + 1] + high[p]
        key = r * nb_up + (nb_up - 1 - index)
        if best < 0 or key < best:
            best = key
            if r == rho:
                # colex index decreases with w, so this is the minimum
                return best
    return best


@njit(cache=True, nogil=True)
def _max_facet(verts, dim, rho, ranks, binom, nb_down):
    """Key of the largest facet with the same diameter, or -1."""
    # verts has dim+1 entries (the coface); facets have dimension dim-1
    for j in range(dim, -1, -1):
        r = 0
        for a in range(dim + 1):
            if a == j:
                continue
            for b in range(a + 1, dim + 1):
                if b == j:
                    continue
                e = ranks[verts[a], verts[b]]
                if e > r:
                    r = e
        if r == rho:
            index = 0
            pos = 0
            for a in range(dim + 1):
                if a == j:
                    continue
                index += binom[verts[a], pos + 1]
                pos += 1
            return rho * nb_down + (nb_down - 1 - index)
    return -1


@njit(cache=True, nogil=True)
def _heap_push(heap, size, key):
    if size == heap.shape[0]:
        grown = np.empty(2 * heap.shape[0], dtype=np.int64)
        grown[:size] = heap[:size]
        heap = grown
    i = size
    heap[i] = key
    while i > 0:
        parent = (i - 1) >> 1
        if heap[parent] <= heap[i]:
            break
        heap[parent], heap[i] = heap[i], heap[parent]
        i = parent
    return heap, size + 1


@njit(cache=True, nogil=True)
def _heap_pop(heap, size):
    top = heap[0]
    size -= 1
    heap[0] = heap[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        child = left
        if left + 1 < size and heap[left + 1] < heap[left]:
            child = left + 1
        if heap[i] <= heap[child]:
            break
        heap[i], heap[child] = heap[child], heap[i]
        i = child
    return top, size


@njit(cache=True, nogil=True)
def _push_cofacets(heap, size, verts, dim, rho, m, ranks, binom, nb_up, low, high):
    low[0] = 0
    for p in range(dim + 1):
        low[p + 1] = low[p] + binom[verts[p], p + 1]
    high[dim + 1] = 0
    for p in range(dim, -1, -1):
        high[p] = high[p + 1] + binom[verts[p], p + 2]
    p = dim + 1
    for w in range(m - 1, -1, -1):
        if p > 0 and verts[p - 1] == w:
            p -= 1
            continue
        r = rho
        ok = True
        for a in range(dim + 1):
            e = ranks[verts[a], w]
            if e < 0:
                ok = False
                break
            if e > r:
                r = e
        if not ok:
            continue
        index = low[p] + binom[w, p + 1] + high[p]
        heap, size = _heap_push(heap, size, r * nb_up + (nb_up - 1 - index))
    return heap, size


@njit(cache=True, nogil=True)
def _enumerate_simplices(dim, m, ranks, binom, nb, cleared):
    """Keys of all dim-simplices within the cap that are not cleared."""
    out = np.empty(1024, dtype=np.int64)
    n_out = 0
    verts = np.empty(dim + 1, dtype=np.int64)
    diam = np.zeros(dim + 2, dtype=np.int64)
    level = 0
    verts[0] = -1
    while level >= 0:
        verts[level] += 1
        if verts[level] > m - (dim + 1 - level):
            level -= 1
            continue
        v = verts[level]
        r = diam[level]
        ok = True
        for a in range(level):
            e = ranks[verts[a], v]
            if e < 0:
                ok = False
                break
            if e > r:
                r = e
        if not ok:
            continue
        if level == dim:
            index = 0
            for a in range(dim + 1):
                index += binom[verts[a], a + 1]
            if cleared.shape[0] > 0 and cleared[index]:
                continue
            if n_out == out.shape[0]:
                grown = np.empty(2 * n_out, dtype=np.int64)
                grown[:n_out] = out[:n_out]
                out = grown
            out[n_out] = r * nb + (nb - 1 - index)
            n_out += 1
        else:
            diam[level + 1] = r
            level += 1
            verts[level] = v
    return out[:n_out]


@njit(cache=True, nogil=True)
def _append_bar(bars_deg, bars_b, bars_d, n_bars, deg, birth, death):
    if n_bars == bars_deg.shape[0]:
        size = 2 * n_bars
        g0 = np.empty(size, dtype=np.int64)
        g1 = np.empty(size, dtype=np.float64)
        g2 = np.empty(size, dtype=np.float64)
        g0[:n_bars] = bars_deg[:n_bars]
        g1[:n_bars] = bars_b[:n_bars]
        g2[:n_bars] = bars_d[:n_bars]
        bars_deg, bars_b, bars_d = g0, g1, g2
    bars_deg[n_bars] = deg
    bars_b[n_bars] = birth
    bars_d[n_bars] = death
    return bars_deg, bars_b, bars_d, n_bars + 1


@njit(cache=True, nogil=True)
def _rank_data(dist, cap):
    """Distance ranks, distinct values and sorted edge keys.

    Ranks index the distinct distances up to ``cap`` (rank 0 is 0.0); pairs
    above ``cap`` get -1.  Edges are listed by decreasing colex index before a
    stable sort, so equal distances come out in filtration order.
    """
    m = dist.shape[0]
    n_pairs = m * (m - 1) // 2
    d = np.empty(n_pairs, dtype=np.float64)
    ii = np.empty(n_pairs, dtype=np.int64)
    jj = np.empty(n_pairs, dtype=np.int64)
    t = 0
    for j in range(m - 1, 0, -1):
        for i in range(j - 1, -1, -1):
            if dist[i, j] <= cap:
                d[t] = dist[i, j]
                ii[t] = i
                jj[t] = j
                t += 1
    order = np.argsort(d[:t], kind="mergesort")
    ranks = np.full((m, m), -1, dtype=np.int64)
    for i in range(m):
        ranks[i, i] = 0
    values = np.empty(t + 1, dtype=np.float64)
    values[0] = 0.0
    n_values = 1
    edge_keys = np.empty(t, dtype=np.int64)
    for q in range(t):
        e = order[q]
        v = d[e]
        if v != values[n_values - 1]:
            values[n_values] = v
            n_values += 1
        r = n_values - 1
        i, j = ii[e], jj[e]
        ranks[i, j] = r
        ranks[j, i] = r
        edge_keys[q] = r * n_pairs + (n_pairs - 1 - (j * (j - 1) // 2 + i))
    return ranks, values[:n_values], edge_keys


@njit(cache=True, nogil=True)
def rips_barcode(dist, max_degree, cap):
    """Persistence intervals of the Vietoris-Rips filtration of ``dist``.

    Returns ``(degree, birth, death)`` arrays for degrees ``0..max_degree``;
    essential classes have ``death = inf``.  The filtration contains simplices
    up to dimension ``max_degree + 1`` with diameter at most ``cap``.
    """
    m = dist.shape[0]
    # beyond the enclosing radius the complex is a cone: nothing is born or
    # dies later, so capping there leaves every interval unchanged
    for i in range(m):
        ecc = 0.0
        for j in range(m):
            if dist[i, j] > ecc:
                ecc = dist[i, j]
        if ecc < cap:
            cap = ecc
    ranks, values, edge_keys = _rank_data(dist, cap)
    return _barcode(ranks, values, edge_keys, max_degree)


@njit(cache=True, nogil=True)
def _barcode(ranks, values, edge_keys, max_degree):
    m = ranks.shape[0]
    bars_deg = np.empty(64, dtype=np.int64)
    bars_b = np.empty(64, dtype=np.float64)
    bars_d = np.empty(64, dtype=np.float64)
    n_bars = 0
    binom = _binomials(m, max_degree + 3)

    # degree 0: Kruskal in filtration order
    nb1 = binom[m, 2]
    n_edges = edge_keys.shape[0]
    parent = np.arange(m)
    columns = np.empty(n_edges, dtype=np.int64)
    n_columns = 0
    verts = np.empty(max_degree + 3, dtype=np.int64)
    cleared = np.zeros(0, dtype=np.bool_)
    for t in range(n_edges):
        key = edge_keys[t]
        _decode(nb1 - 1 - key % nb1, 1, m - 1, binom, verts)
        a = verts[0]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = verts[1]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a != b:
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
            death = values[key // nb1]
            if death > 0.0:
                bars_deg, bars_b, bars_d, n_bars = _append_bar(
                    bars_deg, bars_b, bars_d, n_bars, 0, 0.0, death)
        else:
            columns[n_columns] = key
            n_columns += 1
    for v in range(m):
        if parent[v] == v:
            bars_deg, bars_b, bars_d, n_bars = _append_bar(
                bars_deg, bars_b, bars_d, n_bars, 0, 0.0, np.inf)
    columns = columns[:n_columns][::-1].copy()

    low = np.empty(max_degree + 4, dtype=np.int64)
    high = np.empty(max_degree + 4, dtype=np.int64)
    coface = np.empty(max_degree + 3, dtype=np.int64)
    heap = np.empty(256, dtype=np.int64)
    for dim in range(1, max_degree + 1):
        if dim > 1:
            columns = np.sort(_enumerate_simplices(dim, m, ranks, binom, binom[m, dim + 1], cleared))[::-1].copy()
        nb = binom[m, dim + 1]
        nb_up = binom[m, dim + 2]
        track = dim < max_degree
        if track:
            cleared = np.zeros(nb_up, dtype=np.bool_)
        pivots = Dict.empty(key_type=types.int64, value_type=types.int64)
        v_start = np.empty(16, dtype=np.int64)
        v_len = np.empty(16, dtype=np.int64)
        v_buf = np.empty(64, dtype=np.int64)
        n_stored = 0
        buf_used = 0
        work = np.empty(16, dtype=np.int64)
        for c in range(columns.shape[0]):
            key = columns[c]
            rho = key // nb
            _decode(nb - 1 - key % nb, dim, m - 1, binom, verts)
            tau = _min_cofacet(verts, dim, rho, m, ranks, binom, nb_up, low, high)
            if tau < 0:
                bars_deg, bars_b, bars_d, n_bars = _append_bar(
                    bars_deg, bars_b, bars_d, n_bars, dim, values[rho], np.inf)
                continue
            if tau // nb_up == rho:
                _decode(nb_up - 1 - tau % nb_up, dim + 1, m - 1, binom, coface)
                if _max_facet(coface, dim + 1, rho, ranks, binom, nb) == key:
                    # zero-persistence apparent pair
                    if track:
                        cleared[nb_up - 1 - tau % nb_up] = True
                    continue
            # full reduction of this column
            size = 0
            heap, size = _push_cofacets(heap, size, verts, dim, rho, m, ranks, binom, nb_up, low, high)
            n_work = 0
            work[n_work] = key
            n_work += 1
            pivot = -1
            while True:
                pivot = -1
                while size > 0:
                    top, size = _heap_pop(heap, size)
                    if size > 0 and heap[0] == top:
                        top, size = _heap_pop(heap, size)
                        continue
                    pivot = top
                    heap, size = _heap_push(heap, size, top)
                    break
                if pivot < 0:
                    break
                if pivot in pivots:
                    slot = pivots[pivot]
                    start = v_start[slot]
                    length = v_len[slot]
                    for q in range(length):
                        other = v_buf[start + q]
                        if n_work == work.shape[0]:
                            grown = np.empty(2 * n_work, dtype=np.int64)
                            grown[:n_work] = work[:n_work]
                            work = grown
                        work[n_work] = other
                        n_work += 1
                        _decode(nb - 1 - other % nb, dim, m - 1, binom, coface)
                        heap, size = _push_cofacets(heap, size, coface, dim, other // nb,
                                                    m, ranks, binom, nb_up, low, high)
                    continue
                # pivot may belong to an apparent pair handled earlier
                _decode(nb_up - 1 - pivot % nb_up, dim + 1, m - 1, binom, coface)
                prho = pivot // nb_up
                facet = _max_facet(coface, dim + 1, prho, ranks, binom, nb)
                if facet >= 0 and facet != key:
                    _decode(nb - 1 - facet % nb, dim, m - 1, binom, coface)
                    if _min_cofacet(coface, dim, prho, m, ranks, binom, nb_up, low, high) == pivot:
                        if n_work == work.shape[0]:
                            grown = np.empty(2 * n_work, dtype=np.int64)
                            grown[:n_work] = work[:n_work]
                            work = grown
                        work[n_work] = facet
                        n_work += 1
                        heap, size = _push_cofacets(heap, size, coface, dim, prho,
                                                    m, ranks, binom, nb_up, low, high)
                        continue
                break
            if pivot < 0:
                bars_deg, bars_b, bars_d, n_bars = _append_bar(
                    bars_deg, bars_b, bars_d, n_bars, dim, values[rho], np.inf)
                continue
            prho = pivot // nb_up
            if prho > rho:
                bars_deg, bars_b, bars_d, n_bars = _append_bar(
                    bars_deg, bars_b, bars_d, n_bars, dim, values[rho], values[prho])
            if track:
                cleared[nb_up - 1 - pivot % nb_up] = True
            # store the reduction column with Z/2 cancellation
            reduced = np.sort(work[:n_work])
            if n_stored == v_start.shape[0]:
                g0 = np.empty(2 * n_stored, dtype=np.int64)
                g1 = np.empty(2 * n_stored, dtype=np.int64)
                g0[:n_stored] = v_start[:n_stored]
                g1[:n_stored] = v_len[:n_stored]
                v_start, v_len = g0, g1
            v_start[n_stored] = buf_used
            count = 0
            q = 0
            while q < n_work:
                run = 1
                while q + run < n_work and reduced[q + run] == reduced[q]:
                    run += 1
                if run % 2 == 1:
                    if buf_used == v_buf.shape[0]:
                        grown = np.empty(2 * buf_used, dtype=np.int64)
                        grown[:buf_used] = v_buf[:buf_used]
                        v_buf = grown
                    v_buf[buf_used] = reduced[q]
                    buf_used += 1
                    count += 1
                q += run
            v_len[n_stored] = count
            pivots[pivot] = n_stored
            n_stored += 1
    return bars_deg[:n_bars], bars_b[:n_bars], bars_d[:n_bars]
