"""Directed-graph substrate: wirings, hop distances, reach, SCCs, diameter.

Distances at this layer use ``UNREACHABLE`` (-1) for missing paths; the
disconnection penalty is applied only by the game layer.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from ._kernels import bfs_all_pairs

UNREACHABLE = -1


@dataclass(frozen=True)
class Wiring:
    """A strategy profile: node ``v`` links to each id in ``out_edges[v]``.

    ``k`` is the per-node link budget; nodes may use fewer links.
    """

    n: int
    k: int
    out_edges: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        edges = tuple(tuple(int(t) for t in row) for row in self.out_edges)
        object.__setattr__(self, "out_edges", edges)
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.k < 0:
            raise ValueError(f"k must be non-negative, got {self.k}")
        if len(edges) != self.n:
            raise ValueError(f"expected {self.n} adjacency rows, got {len(edges)}")
        for v, row in enumerate(edges):
            if len(row) > self.k:
                raise ValueError(f"node {v} has {len(row)} links, budget is {self.k}")
            if len(set(row)) != len(row):
                raise ValueError(f"node {v} lists a target twice: {row}")
            for t in row:
                if not 0 <= t < self.n:
                    raise ValueError(f"node {v} links to out-of-range id {t}")
                if t == v:
                    raise ValueError(f"node {v} links to itself")

    @classmethod
    def empty(cls, n: int, k: int) -> "Wiring":
        return cls(n, k, ((),) * n)

    @classmethod
    def from_lists(cls, lists: Sequence[Iterable[int]], k: int | None = None) -> "Wiring":
        rows = tuple(tuple(r) for r in lists)
        if k is None:
            k = max((len(r) for r in rows), default=0)
        return cls(len(rows), k, rows)

    def with_targets(self, v: int, targets: Iterable[int]) -> "Wiring":
        """Copy with node ``v``'s out-links replaced."""
        rows = list(self.out_edges)
        rows[v] = tuple(targets)
        return Wiring(self.n, self.k, tuple(rows))

    def key(self) -> tuple[tuple[int, ...], ...]:
        """Order-insensitive hashable form (targets sorted per node)."""
        return tuple(tuple(sorted(row)) for row in self.out_edges)

    def out_degrees(self) -> list[int]:
        return [len(row) for row in self.out_edges]

    def in_degrees(self) -> list[int]:
        deg = [0] * self.n
        for row in self.out_edges:
            for t in row:
                deg[t] += 1
        return deg

    def num_edges(self) -> int:
        return sum(len(row) for row in self.out_edges)

    def edges(self) -> list[tuple[int, int]]:
        return [(v, t) for v, row in enumerate(self.out_edges) for t in row]

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) arrays of the out-adjacency."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum([len(row) for row in self.out_edges], out=indptr[1:])
        indices = np.fromiter((t for row in self.out_edges for t in row), dtype=np.int64, count=int(indptr[-1]))
        return indptr, indices


def _check_node(w: Wiring, v: int) -> None:
    if not 0 <= v < w.n:
        raise IndexError(f"node id {v} out of range for n={w.n}")


def single_source_distances(w: Wiring, v: int) -> np.ndarray:
    """BFS hop counts from ``v``; ``UNREACHABLE`` where no path exists."""
    _check_node(w, v)
    dist = np.full(w.n, UNREACHABLE, dtype=np.int64)
    dist[v] = 0
    queue = deque([v])
    adj = w.out_edges
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for x in adj[u]:
            if dist[x] == UNREACHABLE:
                dist[x] = du
                queue.append(x)
    return dist


def all_pairs_distances(w: Wiring, drop: int | None = None) -> np.ndarray:
    """All-pairs hop distances as an int matrix with ``UNREACHABLE`` markers.

    ``drop`` computes the distances of the residual wiring without that
    node's out-links.
    """
    indptr, indices = w.csr
    return bfs_all_pairs(indptr, indices, w.n, -1 if drop is None else int(drop))


def reachable_counts(w: Wiring) -> np.ndarray:
    """Reach of every node (number of *other* nodes it has paths to)."""
    d = all_pairs_distances(w)
    return (d > 0).sum(axis=1)


def reach(w: Wiring, v: int) -> int:
    """Number of nodes other than ``v`` reachable from ``v``."""
    return int((single_source_distances(w, v) > 0).sum())


@dataclass(frozen=True)
class Condensation:
    """SCC partition plus the component DAG.

    ``components`` are in reverse topological order (Tarjan emission order):
    every DAG edge goes from a later component to an earlier one.
    """

    components: tuple[frozenset[int], ...]
    membership: tuple[int, ...]
    dag_edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def sinks(self) -> list[int]:
        has_out = {a for a, _ in self.dag_edges}
        return [c for c in range(len(self.components)) if c not in has_out]

    def sources(self) -> list[int]:
        has_in = {b for _, b in self.dag_edges}
        return [c for c in range(len(self.components)) if c not in has_in]


def strongly_connected_components(w: Wiring) -> Condensation:
    """Iterative Tarjan; returns components and the condensation DAG."""
    n = w.n
    adj = w.out_edges
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[frozenset[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            if i < len(adj[v]):
                work[-1] = (v, i + 1)
                x = adj[v][i]
                if index[x] == -1:
                    index[x] = low[x] = counter
                    counter += 1
                    stack.append(x)
                    on_stack[x] = True
                    work.append((x, 0))
                elif on_stack[x]:
                    low[v] = min(low[v], index[x])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                members = set()
                while True:
                    x = stack.pop()
                    on_stack[x] = False
                    members.add(x)
                    if x == v:
                        break
                comps.append(frozenset(members))
    membership = [0] * n
    for c, members in enumerate(comps):
        for x in members:
            membership[x] = c
    dag = {
        (membership[v], membership[t])
        for v in range(n)
        for t in adj[v]
        if membership[v] != membership[t]
    }
    return Condensation(tuple(comps), tuple(membership), frozenset(dag))


def is_strongly_connected(w: Wiring) -> bool:
    if w.n == 1:
        return True
    d = single_source_distances(w, 0)
    if (d == UNREACHABLE).any():
        return False
    # reverse reachability from 0
    rev = [[] for _ in range(w.n)]
    for v, row in enumerate(w.out_edges):
        for t in row:
            rev[t].append(v)
    seen = [False] * w.n
    seen[0] = True
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for x in rev[u]:
            if not seen[x]:
                seen[x] = True
                queue.append(x)
    return all(seen)


def diameter(w: Wiring) -> int | None:
    """Largest pairwise hop distance, or ``None`` when not strongly connected."""
    d = all_pairs_distances(w)
    if (d == UNREACHABLE).any():
        return None
    return int(d.max())


def eccentricities(w: Wiring) -> np.ndarray:
    """Per-node max distance; ``UNREACHABLE`` rows flag disconnected nodes."""
    d = all_pairs_distances(w)
    ecc = d.max(axis=1)
    ecc[(d == UNREACHABLE).any(axis=1)] = UNREACHABLE
    return ecc
