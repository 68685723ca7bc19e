"""BDNF game semantics: costs, residual distances, exact best response, stability.

A node's best response is a k-median over the residual wiring: with its own
out-links removed, choosing target set ``S`` puts every destination ``j`` at
distance ``1 + min_{t in S} d_res(t, j)``.  We solve it exactly by enumerating
target sets against a precomputed residual distance matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._kernels import best_subset
from .graph import UNREACHABLE, Wiring, all_pairs_distances, single_source_distances

# Relative slack when comparing float costs; integer-weight games are exact.
REL_TOL = 1e-9


def default_penalty(n: int) -> float:
    """Disconnection penalty used when none is given.

    ``n**2`` exceeds any finite distance sum by more than one hop per node, so
    a best response never trades reach for shorter paths.
    """
    return float(max(n * n, n + 1))


@dataclass(frozen=True, eq=False)
class GameInstance:
    n: int
    budgets: tuple[int, ...]
    weights: np.ndarray
    allowed: tuple[tuple[int, ...], ...]
    M: float

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "budgets", tuple(int(b) for b in self.budgets))
        object.__setattr__(self, "allowed", tuple(tuple(sorted(int(x) for x in a)) for a in self.allowed))
        n = self.n
        if w.shape != (n, n):
            raise ValueError(f"weights must be {n}x{n}, got {w.shape}")
        if (w < 0).any():
            raise ValueError("weights must be non-negative")
        if np.any(np.diag(w) != 0):
            raise ValueError("self-weights must be zero")
        if len(self.budgets) != n or len(self.allowed) != n:
            raise ValueError("budgets and allowed targets need one entry per node")
        for v in range(n):
            a = self.allowed[v]
            if self.budgets[v] < 1:
                raise ValueError(f"node {v} budget must be >= 1")
            if v in a:
                raise ValueError(f"node {v} may not target itself")
            if len(set(a)) != len(a) or any(not 0 <= x < n for x in a):
                raise ValueError(f"bad allowed targets for node {v}: {a}")
            if len(a) < self.budgets[v]:
                raise ValueError(f"node {v} has fewer allowed targets than its budget")
        if not self.M > n:
            raise ValueError(f"penalty M={self.M} must exceed n={n}")

    @classmethod
    def build(cls, weights, budgets: int | Sequence[int], allowed=None, M: float | None = None) -> "GameInstance":
        w = np.asarray(weights, dtype=np.float64)
        n = w.shape[0]
        if isinstance(budgets, (int, np.integer)):
            budgets = [int(budgets)] * n
        if allowed is None:
            allowed = [tuple(u for u in range(n) if u != v) for v in range(n)]
        return cls(n, tuple(budgets), w, tuple(tuple(a) for a in allowed), default_penalty(n) if M is None else float(M))

    @property
    def k(self) -> int:
        """Largest budget (the wiring-level degree bound)."""
        return max(self.budgets)

    def is_symmetric(self) -> bool:
        return all(len(self.allowed[v]) == self.n - 1 for v in range(self.n))

    def is_uniform(self) -> bool:
        off = ~np.eye(self.n, dtype=bool)
        return (
            self.is_symmetric()
            and len(set(self.budgets)) == 1
            and bool(np.all(self.weights[off] == 1.0))
        )

    def legal_size(self, v: int) -> int:
        return min(self.budgets[v], len(self.allowed[v]))

    def empty_wiring(self) -> Wiring:
        return Wiring.empty(self.n, self.k)


def uniform_game(n: int, k: int, M: float | None = None) -> GameInstance:
    if n < 2:
        raise ValueError("need at least two nodes")
    if not 1 <= k <= n - 1:
        raise ValueError(f"budget k={k} must satisfy 1 <= k < n={n}")
    w = np.ones((n, n)) - np.eye(n)
    return GameInstance.build(w, k, M=M)


def _check_dims(g: GameInstance, w: Wiring) -> None:
    if w.n != g.n:
        raise ValueError(f"wiring has {w.n} nodes, game has {g.n}")
    for v, row in enumerate(w.out_edges):
        if len(row) > g.budgets[v]:
            raise ValueError(f"node {v} uses {len(row)} links, budget {g.budgets[v]}")


def _penalized(d: np.ndarray, M: float) -> np.ndarray:
    return np.where(d == UNREACHABLE, M, d).astype(np.float64)


def node_cost(g: GameInstance, w: Wiring, v: int) -> float:
    """Weighted distance sum of ``v`` with ``M`` for unreachable destinations."""
    _check_dims(g, w)
    d = single_source_distances(w, v)
    return float(_penalized(d, g.M) @ g.weights[v])


def costs(g: GameInstance, w: Wiring) -> np.ndarray:
    _check_dims(g, w)
    d = _penalized(all_pairs_distances(w), g.M)
    return np.einsum("ij,ij->i", d, g.weights)


def social_cost(g: GameInstance, w: Wiring) -> float:
    return float(costs(g, w).sum())


def utopian_bound(n: int, k: int) -> int:
    """Layered lower bound: k nodes at hop 1, k^2 at hop 2, ... until n-1 nodes."""
    remaining, layer, hop, total = n - 1, k, 1, 0
    while remaining > 0:
        take = min(layer, remaining)
        total += take * hop
        remaining -= take
        layer *= k
        hop += 1
    return total


def utopian_cost(g: GameInstance, v: int) -> int:
    if not g.is_uniform():
        raise ValueError("utopian cost is only defined for uniform games")
    if not 0 <= v < g.n:
        raise IndexError(v)
    return utopian_bound(g.n, g.budgets[v])


def residual_distances(g: GameInstance, w: Wiring, v: int) -> np.ndarray:
    """All-pairs distances with ``v``'s out-links deleted (``UNREACHABLE`` marked)."""
    _check_dims(g, w)
    if not 0 <= v < g.n:
        raise IndexError(v)
    return all_pairs_distances(w, drop=v)


@dataclass(frozen=True)
class BestResponse:
    node: int
    targets: tuple[int, ...]
    cost: float
    current_cost: float
    improved: bool


def _strictly_less(a: float, b: float) -> bool:
    return a < b - REL_TOL * max(1.0, abs(b))


def best_response(g: GameInstance, w: Wiring, v: int, residual: np.ndarray | None = None) -> BestResponse:
    """Exact cost-minimising target set for ``v`` against the residual wiring.

    Ties keep the incumbent set when it is optimal; otherwise the
    lexicographically smallest optimal set wins.
    """
    _check_dims(g, w)
    cand = g.allowed[v]
    if not cand:
        raise ValueError(f"node {v} has no legal target")
    s = min(g.budgets[v], len(cand))
    if residual is None:
        residual = all_pairs_distances(w, drop=v)
    wv = g.weights[v]
    cols = np.flatnonzero(wv)
    if cols.size == 0:
        # indifferent node: every legal set costs zero
        current = tuple(sorted(w.out_edges[v]))
        legal = len(current) == s and set(current) <= set(cand)
        return BestResponse(v, current if legal else tuple(cand[:s]), 0.0, 0.0, False)
    # 1 + d_res, where unreachable becomes exactly M
    sub = residual[np.ix_(cand, cols)]
    rows = np.where(sub == UNREACHABLE, g.M, sub + 1.0)
    wc = np.ascontiguousarray(wv[cols])
    best_idx, best_cost = best_subset(rows, wc, s)

    current = tuple(sorted(w.out_edges[v]))
    pos = {t: i for i, t in enumerate(cand)}
    if current and all(t in pos for t in current):
        cur_cost = float(rows[[pos[t] for t in current]].min(axis=0) @ wc)
    elif current:
        cur_cost = node_cost(g, w, v)
    else:
        cur_cost = float(wc.sum() * g.M)
    legal = len(current) == s and all(t in pos for t in current)
    if legal and not _strictly_less(best_cost, cur_cost):
        return BestResponse(v, current, cur_cost, cur_cost, False)
    targets = tuple(cand[i] for i in best_idx)
    return BestResponse(v, targets, best_cost, cur_cost, _strictly_less(best_cost, cur_cost))


@dataclass(frozen=True)
class Deviation:
    node: int
    targets: tuple[int, ...]
    old_cost: float
    new_cost: float


@dataclass(frozen=True)
class StabilityResult:
    stable: bool
    witness: Deviation | None = None

    def __bool__(self) -> bool:
        return self.stable


def check_full_budget(g: GameInstance, w: Wiring) -> None:
    _check_dims(g, w)
    for v, row in enumerate(w.out_edges):
        if len(row) != g.legal_size(v):
            raise ValueError(f"node {v} uses {len(row)} links; stability needs {g.legal_size(v)}")
        bad = set(row) - set(g.allowed[v])
        if bad:
            raise ValueError(f"node {v} links to disallowed targets {sorted(bad)}")


def is_stable(g: GameInstance, w: Wiring, nodes: Iterable[int] | None = None) -> StabilityResult:
    """Pure-Nash check; on failure returns the first improving deviation found.

    Uniform games skip nodes already at the utopian lower bound, which no
    deviation can beat.
    """
    check_full_budget(g, w)
    uniform = g.is_uniform()
    current = costs(g, w) if uniform else None
    for v in range(g.n) if nodes is None else nodes:
        if uniform and current[v] <= utopian_bound(g.n, g.budgets[v]):
            continue
        br = best_response(g, w, v)
        if br.improved:
            return StabilityResult(False, Deviation(v, br.targets, br.current_cost, br.cost))
    return StabilityResult(True)


def replay_deviation(g: GameInstance, w: Wiring, dev: Deviation) -> tuple[float, float]:
    """Recompute (old, new) cost of a witness from scratch by BFS."""
    before = node_cost(g, w, dev.node)
    after = node_cost(g, w.with_targets(dev.node, dev.targets), dev.node)
    return before, after
