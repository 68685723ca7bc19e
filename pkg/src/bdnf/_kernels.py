"""Compiled inner loops: BFS all-pairs distances and exhaustive k-median."""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def bfs_all_pairs(indptr, indices, n, drop):
    """Hop distances from every node (-1 if unreachable); ``drop`` loses its out-links."""
    dist = np.full((n, n), -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for s in range(n):
        row = dist[s]
        row[s] = 0
        head = 0
        tail = 1
        queue[0] = s
        while head < tail:
            u = queue[head]
            head += 1
            if u == drop:
                continue
            du = row[u] + 1
            for e in range(indptr[u], indptr[u + 1]):
                x = indices[e]
                if row[x] == -1:
                    row[x] = du
                    queue[tail] = x
                    tail += 1
    return dist


@njit(cache=True)
def best_subset(rows, w, s):
    """Lexicographically first ``s``-subset of rows minimising ``sum_j w_j min_i rows[i, j]``.

    Subsets are visited in lexicographic order and only a strictly smaller
    cost replaces the incumbent, matching argmin over ordered combinations.
    Prefix minima are kept per depth so each tree node costs one row pass.
    """
    m, c = rows.shape
    idx = np.empty(s, dtype=np.int64)
    mins = np.empty((s + 1, c), dtype=np.float64)
    for j in range(c):
        mins[0, j] = np.inf
    best = np.inf
    best_idx = np.zeros(s, dtype=np.int64)
    depth = 0
    idx[0] = 0
    while depth >= 0:
        i = idx[depth]
        if i > m - (s - depth):
            depth -= 1
            if depth >= 0:
                idx[depth] += 1
            continue
        prev = mins[depth]
        cur = mins[depth + 1]
        for j in range(c):
            r = rows[i, j]
            cur[j] = r if r < prev[j] else prev[j]
        if depth == s - 1:
            total = 0.0
            for j in range(c):
                total += w[j] * cur[j]
            if total < best:
                best = total
                best_idx[:] = idx
            idx[depth] += 1
        else:
            depth += 1
            idx[depth] = i + 1
    return best_idx, best


@njit(cache=True)
def _unit_improvable(u, choice, allowed_ptr, allowed_flat, W, M, tol, dist):
    """True if node u (one link) has a strictly cheaper legal target than its current one."""
    n = choice.shape[0]
    best = np.inf
    cur = np.inf
    for e in range(allowed_ptr[u], allowed_ptr[u + 1]):
        t = allowed_flat[e]
        for x in range(n):
            dist[x] = -1
        # residual graph is functional: walk the chain from t, u's own link removed
        x = t
        d = 1
        while x != -1 and dist[x] == -1:
            dist[x] = d
            if x == u:
                break
            x = choice[x]
            d += 1
        c = 0.0
        for y in range(n):
            wy = W[u, y]
            if wy != 0.0 and y != u:
                c += wy * (M if dist[y] == -1 else dist[y])
        if c < best:
            best = c
        if t == choice[u]:
            cur = c
    return best < cur - tol * max(1.0, abs(cur))


@njit(cache=True)
def unit_ne_search(order, cand_ptr, cand_flat, allowed_ptr, allowed_flat, check_ptr, check_flat, W, M, tol, budget):
    """Depth-first equilibrium search when every node owns exactly one link.

    Returns (choice, visited, status) with status 1 found, 0 none, -1 budget hit.
    """
    n = order.shape[0]
    choice = np.full(n, -1, dtype=np.int64)
    pick = np.zeros(n, dtype=np.int64)
    dist = np.empty(n, dtype=np.int64)
    visited = 0
    depth = 0
    pick[0] = cand_ptr[order[0]]
    while depth >= 0:
        v = order[depth]
        if pick[depth] >= cand_ptr[v + 1]:
            choice[v] = -1
            depth -= 1
            if depth >= 0:
                pick[depth] += 1
            continue
        visited += 1
        if visited > budget:
            return choice, visited, -1
        choice[v] = cand_flat[pick[depth]]
        ok = True
        for e in range(check_ptr[depth], check_ptr[depth + 1]):
            if _unit_improvable(check_flat[e], choice, allowed_ptr, allowed_flat, W, M, tol, dist):
                ok = False
                break
        if not ok:
            pick[depth] += 1
        elif depth == n - 1:
            return choice, visited, 1
        else:
            depth += 1
            pick[depth] = cand_ptr[order[depth]]
    return choice, visited, 0
