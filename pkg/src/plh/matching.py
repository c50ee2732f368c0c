"""Bottleneck distance between persistence diagrams."""
from __future__ import annotations

import itertools
import math

import numpy as np
from numba import njit

from .persistence import PersistenceDiagram

ORACLE_MAX_POINTS = 8


def _intervals(d) -> np.ndarray:
    if isinstance(d, PersistenceDiagram):
        return d.intervals
    return np.asarray(d, dtype=np.float64).reshape(-1, 2)


def _degree_check(a, b) -> None:
    if isinstance(a, PersistenceDiagram) and isinstance(b, PersistenceDiagram) and a.degree != b.degree:
        raise ValueError(f"diagrams of degree {a.degree} and {b.degree} are not comparable")


def _augmented_costs(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Square cost matrix over ``p + diag(q)`` (rows) and ``q + diag(p)`` (columns).

    Each point may go to its own diagonal projection at half its persistence,
    and diagonal slots match each other for free.
    """
    n, m = len(p), len(q)
    size = n + m
    cost = np.full((size, size), np.inf)
    if n and m:
        cost[:n, :m] = np.maximum(np.abs(p[:, None, 0] - q[None, :, 0]),
                                  np.abs(p[:, None, 1] - q[None, :, 1]))
    half_p = (p[:, 1] - p[:, 0]) / 2
    half_q = (q[:, 1] - q[:, 0]) / 2
    cost[np.arange(n), m + np.arange(n)] = half_p
    cost[n + np.arange(m), np.arange(m)] = half_q
    cost[n:, m:] = 0.0
    return cost


@njit(cache=True, nogil=True)
def _has_perfect_matching(cost, t):
    """Hopcroft-Karp on the bipartite graph of entries ``cost <= t``."""
    size = cost.shape[0]
    match_row = np.full(size, -1, dtype=np.int64)
    match_col = np.full(size, -1, dtype=np.int64)
    dist = np.empty(size, dtype=np.int64)
    queue = np.empty(size, dtype=np.int64)
    stack_row = np.empty(size, dtype=np.int64)
    stack_col = np.empty(size, dtype=np.int64)
    matched = 0
    # greedy start
    for i in range(size):
        for j in range(size):
            if match_col[j] < 0 and cost[i, j] <= t:
                match_row[i] = j
                match_col[j] = i
                matched += 1
                break
    inf = size + 1
    while True:
        # BFS layering from free rows
        head = 0
        tail = 0
        for i in range(size):
            if match_row[i] < 0:
                dist[i] = 0
                queue[tail] = i
                tail += 1
            else:
                dist[i] = inf
        found = False
        while head < tail:
            i = queue[head]
            head += 1
            for j in range(size):
                if cost[i, j] > t:
                    continue
                k = match_col[j]
                if k < 0:
                    found = True
                elif dist[k] == inf:
                    dist[k] = dist[i] + 1
                    queue[tail] = k
                    tail += 1
        if not found:
            break
        # layered DFS, iterative; next_col remembers where each row resumes
        next_col = np.zeros(size, dtype=np.int64)
        for root in range(size):
            if match_row[root] >= 0:
                continue
            depth = 0
            stack_row[0] = root
            while depth >= 0:
                i = stack_row[depth]
                advanced = False
                while next_col[i] < size:
                    j = next_col[i]
                    next_col[i] += 1
                    if cost[i, j] > t:
                        continue
                    k = match_col[j]
                    if k < 0:
                        # augment along the stack
                        stack_col[depth] = j
                        for level in range(depth, -1, -1):
                            r = stack_row[level]
                            c = stack_col[level]
                            match_row[r] = c
                            match_col[c] = r
                        matched += 1
                        depth = -1
                        advanced = True
                        break
                    if dist[k] == dist[i] + 1:
                        stack_col[depth] = j
                        depth += 1
                        stack_row[depth] = k
                        advanced = True
                        break
                if not advanced:
                    dist[i] = inf
                    depth -= 1
        if matched == size:
            break
    return matched == size


@njit(cache=True, nogil=True)
def _bottleneck_finite(cost, candidates):
    lo = 0
    hi = candidates.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _has_perfect_matching(cost, candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return candidates[lo]


def _split(intervals: np.ndarray):
    finite = np.isfinite(intervals[:, 1])
    return intervals[finite], np.sort(intervals[~finite, 0])


def bottleneck_distance(a, b) -> float:
    """Bottleneck distance under the sup-norm, with diagonal augmentation.

    Essential classes are matched among themselves by sorted birth; if the
    two sides have different numbers of them the distance is infinite.
    """
    _degree_check(a, b)
    p, p_inf = _split(_intervals(a))
    q, q_inf = _split(_intervals(b))
    if len(p_inf) != len(q_inf):
        return math.inf
    essential = float(np.max(np.abs(p_inf - q_inf))) if len(p_inf) else 0.0
    if len(p) + len(q) == 0:
        return essential
    cost = _augmented_costs(p, q)
    candidates = np.unique(cost[np.isfinite(cost)])
    finite = float(_bottleneck_finite(cost, candidates))
    return max(finite, essential)


def bottleneck_oracle(a, b) -> float:
    """Exact bottleneck distance by trying every bijection of the augmented sets.

    Essential classes are treated as ordinary points at infinity: matching
    one to a finite point or to the diagonal costs infinity.
    """
    _degree_check(a, b)
    p, q = _intervals(a), _intervals(b)
    n, m = len(p), len(q)
    if n + m > ORACLE_MAX_POINTS:
        raise ValueError(f"oracle limited to {ORACLE_MAX_POINTS} points, got {n + m}")
    size = n + m
    if size == 0:
        return 0.0
    cost = np.full((size, size), np.inf)
    with np.errstate(invalid="ignore"):
        for i in range(n):
            for j in range(m):
                db = abs(p[i, 0] - q[j, 0])
                if math.isinf(p[i, 1]) and math.isinf(q[j, 1]):
                    dd = 0.0
                else:
                    dd = abs(p[i, 1] - q[j, 1])
                cost[i, j] = max(db, dd)
    for i in range(n):
        # any diagonal slot on the right will do
        cost[i, m:] = (p[i, 1] - p[i, 0]) / 2
    for j in range(m):
        cost[n:, j] = (q[j, 1] - q[j, 0]) / 2
    cost[n:, m:] = 0.0
    perms = np.array(list(itertools.permutations(range(size))), dtype=np.int64)
    worst = cost[np.arange(size)[None, :], perms].max(axis=1)
    return float(worst.min())
