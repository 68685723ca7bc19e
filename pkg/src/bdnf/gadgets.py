"""Games without pure equilibria, the 3SAT reduction, and exact equilibrium search.

The 11-node gadget is two five-node halves (a central C, tops LT/RT, bottoms
LB/RB) plus one EXTRA node.  Tops have a single cross link into the other
half's bottoms, centrals pick one of their own tops, bottoms pick their own
central or EXTRA.  The reach preferences make the two centrals chase each
other like matching pennies.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._kernels import unit_ne_search
from .game import REL_TOL, GameInstance, best_response, check_full_budget, is_stable
from .graph import UNREACHABLE, Wiring, all_pairs_distances

ROLES = ("0C", "0LT", "0RT", "0LB", "0RB", "1C", "1LT", "1RT", "1LB", "1RB", "EXTRA")
_ID = {r: i for i, r in enumerate(ROLES)}

# fixed cross links of the tops
TOP_TARGET = {"0LT": "1RB", "0RT": "1LB", "1LT": "0LB", "1RT": "0RB"}
# the top each bottom wants to reach inside its own half
CROSS_TOP = {"0LB": "0RT", "0RB": "0LT", "1LB": "1RT", "1RB": "1LT"}


@dataclass(frozen=True)
class GadgetParams:
    delta: float = 1.0
    zeta: float = 2.0
    xi: float = 1.0
    alpha: float = 1.0
    beta: float = 0.0
    gamma: float = 1.0
    M: float = 100.0

    def lemma_inequalities(self) -> tuple[bool, bool, bool]:
        a, b, c, M = self.alpha, self.beta, self.gamma, self.M
        return a > c, a > b, a * (M - 1) < b * (M - 1) + c * (M - 2)


@dataclass(frozen=True)
class GadgetInstance:
    game: GameInstance
    roles: dict[str, int]
    params: GadgetParams

    def node(self, role: str) -> int:
        return self.roles[role]

    def role_of(self, v: int) -> str:
        for r, i in self.roles.items():
            if i == v:
                return r
        raise KeyError(v)

    def wiring(self, choice: dict[str, str | Sequence[str]]) -> Wiring:
        """Wiring from role -> target role(s); unlisted single-option nodes use that option."""
        rows = []
        for v in range(self.game.n):
            role = self.role_of(v)
            if role in choice:
                t = choice[role]
                ts = (t,) if isinstance(t, str) else tuple(t)
                rows.append(tuple(self.roles[x] for x in ts))
            elif len(self.game.allowed[v]) == self.game.legal_size(v):
                rows.append(self.game.allowed[v])
            else:
                raise ValueError(f"no choice given for {role}")
        return Wiring(self.game.n, self.game.k, tuple(rows))


def _halves():
    for h in "01":
        yield h, f"{h}C", f"{h}LT", f"{h}RT", f"{h}LB", f"{h}RB"


def asymmetric_gadget(M: float = 100.0, gamma: float | None = None) -> GadgetInstance:
    """Restricted-strategy (11,1) game with no pure equilibrium.

    Bottoms weigh their cross top by ``gamma`` (default M) and EXTRA by 1;
    EXTRA's single option is 0C and it weighs nobody.
    """
    if M <= 11:
        raise ValueError("need M > 11")
    gamma = float(M) if gamma is None else float(gamma)
    n = 11
    w = np.zeros((n, n))
    allowed: list[tuple[int, ...]] = [()] * n
    for h, c, lt, rt, lb, rb in _halves():
        other = "1" if h == "0" else "0"
        w[_ID[c], _ID[f"{other}C"]] = 1.0
        allowed[_ID[c]] = (_ID[lt], _ID[rt])
        for top in (lt, rt):
            allowed[_ID[top]] = (_ID[TOP_TARGET[top]],)
            w[_ID[top], _ID[TOP_TARGET[top]]] = 1.0
        for b in (lb, rb):
            allowed[_ID[b]] = (_ID[c], _ID["EXTRA"])
            w[_ID[b], _ID["EXTRA"]] = 1.0
            w[_ID[b], _ID[CROSS_TOP[b]]] = gamma
    allowed[_ID["EXTRA"]] = (_ID["0C"],)
    g = GameInstance.build(w, 1, allowed, M=M)
    return GadgetInstance(g, dict(_ID), GadgetParams(alpha=1.0, beta=0.0, gamma=gamma, M=M))


def start_profile(gad: GadgetInstance) -> Wiring:
    """0C on 0LT, 1C on 1RT, every bottom already answering its central."""
    choice = {"0C": "0LT", "1C": "1RT", "0RB": "0C", "0LB": "EXTRA", "1LB": "1C", "1RB": "EXTRA"}
    if "S1" in gad.roles:
        choice = {r: (t, "S1") for r, t in choice.items()}
        choice.update({r: (TOP_TARGET[r], "S1") for r in TOP_TARGET})
        choice.update(EXTRA=("S1", "S2"), S1=("EXTRA", "S2"), S2=("EXTRA", "S1"))
    return gad.wiring(choice)


def restricted_profiles(g: GameInstance):
    """Every profile drawn from the legal strategy sets, in lexicographic order."""
    for rows in itertools.product(*(legal_sets(g, v) for v in range(g.n))):
        yield Wiring(g.n, g.k, rows)


def all_pure_equilibria(g: GameInstance) -> list[Wiring]:
    """Brute force over the full legal product; for small games only."""
    return [w for w in restricted_profiles(g) if is_stable(g, w)]


def lifted_asymmetric_gadget(M: float = 1000.0) -> GadgetInstance:
    """The gadget for k=2 on 13 nodes.

    Two sinks S1, S2 join EXTRA in a closed triangle; every gadget node must
    spend its second link on S1, which a large weight enforces.
    """
    base = asymmetric_gadget(M)
    n = 13
    roles = dict(base.roles, S1=11, S2=12)
    w = np.zeros((n, n))
    w[:11, :11] = base.game.weights
    heavy = 10.0 * M
    allowed = []
    for v in range(11):
        if v == roles["EXTRA"]:
            allowed.append((11, 12))
            continue
        allowed.append(tuple(sorted(set(base.game.allowed[v]) | {11})))
        w[v, 11] = heavy
    allowed.append((roles["EXTRA"], 12))
    allowed.append((roles["EXTRA"], 11))
    g = GameInstance.build(w, 2, allowed, M=M)
    return GadgetInstance(g, roles, base.params)


def symmetric_params(M: float = 100.0, gamma: float = 1.0, eps: float = 0.5,
                     delta: float = 1.0, zeta: float = 2.0, xi: float = 1.0) -> GadgetParams:
    """Bottom-switch weights: beta = gamma + eps, alpha = beta + gamma (M-2)/(M-1) - eps."""
    r = (M - 2) / (M - 1)
    if not 0 < eps < r * gamma:
        raise ValueError(f"need 0 < eps < gamma (M-2)/(M-1) = {r * gamma}")
    if not xi < zeta:
        raise ValueError("need xi < zeta")
    beta = gamma + eps
    alpha = beta + r * gamma - eps
    p = GadgetParams(delta, zeta, xi, alpha, beta, gamma, M)
    assert all(p.lemma_inequalities()), p
    return p


BOTTOMS = ("0LB", "0RB", "1LB", "1RB")
PRIVATE_EXTRA = {b: f"{b}X" for b in BOTTOMS}


def symmetric_gadget(M: float = 100.0, gamma: float = 1.0, eps: float = 0.01, private_extras: bool = True,
                     extra_pin: str | None = None, **kw) -> GadgetInstance:
    """Every node may link anywhere; weights alone recreate the gadget's choices.

    With ``private_extras`` (default, 14 nodes) each bottom gets its own
    fallback node ``<bottom>X`` that is pinned back to it, so a bottom that
    drops its fallback really loses it.  Otherwise the 11-node layout is used
    with one shared EXTRA that weighs nobody, or is pinned to ``extra_pin``.
    The shared layout, and eps above roughly 2 gamma / (M - 4), both admit
    pure equilibria: through the cycle a bottom keeps finite distances to
    whatever it gives up.
    """
    p = symmetric_params(M, gamma, eps, **kw)
    roles = dict(_ID)
    if private_extras:
        if extra_pin is not None:
            raise ValueError("extra_pin only applies to the shared layout")
        del roles["EXTRA"]
        for i, b in enumerate(BOTTOMS):
            roles[PRIVATE_EXTRA[b]] = 10 + i
    n = len(roles)
    w = np.zeros((n, n))
    for h, c, lt, rt, lb, rb in _halves():
        other = "1" if h == "0" else "0"
        for top in (lt, rt):
            w[roles[top], roles[TOP_TARGET[top]]] = p.delta
            w[roles[c], roles[top]] = p.zeta
        w[roles[c], roles[f"{other}C"]] = p.xi
        for b in (lb, rb):
            y = roles[PRIVATE_EXTRA[b]] if private_extras else roles["EXTRA"]
            w[roles[b], y] = p.alpha
            w[roles[b], roles[c]] = p.beta
            w[roles[b], roles[CROSS_TOP[b]]] = p.gamma
            if private_extras:
                w[y, roles[b]] = p.delta
    if extra_pin is not None:
        w[roles["EXTRA"], roles[extra_pin]] = p.delta
    g = GameInstance.build(w, 1, M=M)
    return GadgetInstance(g, roles, p)


# ---------------------------------------------------------------- search


def legal_sets(g: GameInstance, v: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(g.allowed[v], g.legal_size(v)))


class SearchBudgetExceeded(RuntimeError):
    pass


@dataclass
class SearchResult:
    profile: Wiring | None
    visited: int
    checks: int

    @property
    def found(self) -> bool:
        return self.profile is not None


def _closures(g: GameInstance, cands: list[list[tuple[int, ...]]]) -> list[set[int]]:
    """Nodes whose links can influence each node's own best response."""
    possible = [set().union(*map(set, c)) if c else set() for c in cands]
    out = []
    for v in range(g.n):
        seen = {v}
        stack = list(g.allowed[v])
        while stack:
            u = stack.pop()
            if u in seen:
                continue
            seen.add(u)
            stack.extend(possible[u] - seen)
        out.append(seen)
    return out


def exhaustive_ne_search(
    g: GameInstance,
    candidates: Sequence[Sequence[tuple[int, ...]]] | None = None,
    budget: int = 5_000_000,
    order: Sequence[int] | None = None,
    compiled: bool = True,
) -> SearchResult:
    """First pure equilibrium among profiles drawn from ``candidates``, or none.

    Nodes are assigned in ``order``; a node is checked against its full legal
    strategy set as soon as every node it could reach is assigned, which
    prunes whole subtrees.  ``budget`` caps visited partial profiles.
    Games where every node owns one link run in a compiled loop unless
    ``compiled`` is false; both visit profiles in the same order.
    """
    n = g.n
    cands = [list(legal_sets(g, v)) for v in range(n)] if candidates is None else [
        [tuple(sorted(c)) for c in candidates[v]] for v in range(n)
    ]
    if any(not c for c in cands):
        return SearchResult(None, 0, 0)
    clos = _closures(g, cands)
    if order is None:
        order = sorted(range(n), key=lambda v: (len(clos[v]), len(cands[v]), v))
    order = list(order)
    pos = {v: i for i, v in enumerate(order)}
    check_at: list[list[int]] = [[] for _ in range(n)]
    for v in range(n):
        check_at[max(pos[u] for u in clos[v])].append(v)
    for d in range(n):
        # the node just placed is the likeliest to be unhappy
        check_at[d].sort(key=lambda u: (u != order[d], u))
    if compiled and all(g.legal_size(v) == 1 for v in range(n)):
        return _unit_search(g, cands, order, check_at, budget)
    rows: list[tuple[int, ...]] = [()] * n
    visited = checks = 0

    def wiring():
        return Wiring(n, g.k, tuple(rows))

    def rec(d: int) -> Wiring | None:
        nonlocal visited, checks
        if d == n:
            return wiring()
        v = order[d]
        for c in cands[v]:
            visited += 1
            if visited > budget:
                raise SearchBudgetExceeded(f"more than {budget} partial profiles")
            rows[v] = c
            ok = True
            if check_at[d]:
                w = wiring()
                for u in check_at[d]:
                    checks += 1
                    if best_response(g, w, u).improved:
                        ok = False
                        break
            if ok:
                found = rec(d + 1)
                if found is not None:
                    return found
        rows[v] = ()
        return None

    prof = rec(0)
    if prof is not None:
        check_full_budget(g, prof)
    return SearchResult(prof, visited, checks)


def _csr(lists) -> tuple[np.ndarray, np.ndarray]:
    ptr = np.zeros(len(lists) + 1, dtype=np.int64)
    np.cumsum([len(x) for x in lists], out=ptr[1:])
    flat = np.fromiter((t for x in lists for t in x), dtype=np.int64, count=int(ptr[-1]))
    return ptr, flat


def _unit_search(g: GameInstance, cands, order, check_at, budget: int) -> SearchResult:
    cptr, cflat = _csr([[c[0] for c in cs] for cs in cands])
    aptr, aflat = _csr(g.allowed)
    kptr, kflat = _csr(check_at)
    choice, visited, status = unit_ne_search(
        np.asarray(order, dtype=np.int64), cptr, cflat, aptr, aflat, kptr, kflat,
        np.ascontiguousarray(g.weights, dtype=np.float64), float(g.M), REL_TOL, int(budget),
    )
    if status < 0:
        raise SearchBudgetExceeded(f"more than {budget} partial profiles")
    if status == 0:
        return SearchResult(None, int(visited), 0)
    prof = Wiring(g.n, g.k, tuple((int(t),) for t in choice))
    if not is_stable(g, prof):
        raise AssertionError("compiled search returned a profile that fails the exact check")
    return SearchResult(prof, int(visited), 0)


def _cost_with(g: GameInstance, v: int, rows: list[set[int]], own: tuple[int, ...]) -> float:
    r = [tuple(sorted(x)) for x in rows]
    r[v] = own
    d = all_pairs_distances(Wiring(g.n, g.n, tuple(r)))[v]
    d = np.where(d == UNREACHABLE, g.M, d)
    return float(d @ g.weights[v])


def prune_dominated(g: GameInstance, candidates=None, max_rounds: int = 50) -> list[list[tuple[int, ...]]]:
    """Iterated removal of strictly dominated link sets.

    Set ``a`` of node v goes when some surviving ``b`` costs less even in
    b's worst case (only links every survivor of every other node shares)
    than ``a`` does in its best case (all links any survivor might use).
    Every pure equilibrium survives.
    """
    n = g.n
    cands = [list(legal_sets(g, v)) for v in range(n)] if candidates is None else [list(c) for c in candidates]
    for _ in range(max_rounds):
        union = [set().union(*map(set, c)) for c in cands]
        common = [set.intersection(*map(set, c)) for c in cands]
        changed = False
        for v in range(n):
            if len(cands[v]) < 2:
                continue
            ub = {b: _cost_with(g, v, common, b) for b in cands[v]}
            best_ub = min(ub.values())
            keep = [a for a in cands[v] if not _cost_with(g, v, union, a) > best_ub]
            if len(keep) < len(cands[v]):
                cands[v] = keep
                changed = True
                union[v] = set().union(*map(set, keep))
                common[v] = set.intersection(*map(set, keep))
        if not changed:
            break
    return cands


def dominance_witness(g: GameInstance, v: int, cands, a: tuple[int, ...]) -> tuple[int, ...] | None:
    """A surviving set of ``v`` that strictly dominates ``a`` by the bound test, if any."""
    union = [set().union(*map(set, c)) for c in cands]
    common = [set.intersection(*map(set, c)) for c in cands]
    lb = _cost_with(g, v, union, a)
    for b in cands[v]:
        if _cost_with(g, v, common, b) < lb:
            return b
    return None


def pruned_ne_search(g: GameInstance, budget: int = 5_000_000) -> tuple[SearchResult, list[list[tuple[int, ...]]]]:
    survivors = prune_dominated(g)
    return exhaustive_ne_search(g, survivors, budget=budget), survivors


# ---------------------------------------------------------------- 3SAT


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        cl = tuple(tuple(int(x) for x in c) for c in self.clauses)
        for c in cl:
            if len(c) != 3:
                raise ValueError(f"clause {c} must have exactly 3 literals")
            if any(x == 0 or abs(x) > self.num_vars for x in c):
                raise ValueError(f"literal out of range in {c}")
        if not cl:
            raise ValueError("need at least one clause")
        object.__setattr__(self, "clauses", cl)

    def satisfiable(self) -> bool:
        for bits in itertools.product((False, True), repeat=self.num_vars):
            if all(any(bits[abs(x) - 1] == (x > 0) for x in c) for c in self.clauses):
                return True
        return False


def parse_dimacs(text: str) -> CnfFormula:
    nv = nc = None
    lits: list[int] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad problem line: {line!r}")
            nv, nc = int(parts[2]), int(parts[3])
            continue
        if nv is None:
            raise ValueError("clause before 'p cnf' header")
        lits.extend(int(x) for x in line.split())
    if nv is None:
        raise ValueError("missing 'p cnf' header")
    clauses, cur = [], []
    for x in lits:
        if x == 0:
            clauses.append(tuple(cur))
            cur = []
        else:
            cur.append(x)
    if cur:
        raise ValueError("last clause not terminated by 0")
    if len(clauses) != nc:
        raise ValueError(f"header promises {nc} clauses, found {len(clauses)}")
    return CnfFormula(nv, tuple(clauses))


@dataclass(frozen=True)
class SatInstance:
    game: GameInstance
    formula: CnfFormula
    names: tuple[str, ...]

    def node(self, name: str) -> int:
        return self.names.index(name)


# node count per variable / per clause / fixed, see sat_reduction
SAT_SIZE = (3, 8, 16)


def sat_reduction(f: CnfFormula, M: float | None = None) -> SatInstance:
    """BDNF instance with a pure equilibrium iff ``f`` is satisfiable.

    Pieces (all weights not listed are zero):
    - ``V{i}`` picks ``T{i}`` or ``F{i}`` and cares about nothing (truth value);
      ``T{i}``, ``F{i}`` link to a closed pair ``D <-> D2``.
    - literal a of clause j: ``I{j}.{a}`` picks ``P{j}.{a}`` or ``D``, weighing its
      literal node by G and D by 1, so it takes P exactly when the literal is
      true; ``P{j}.{a}`` links to the variable node and to ``Z{j}``; ``Z{j}`` -> D.
    - clause ``K{j}`` picks one of its three I nodes and weighs ``Z{j}``.
    - base ``B`` links to every clause node.
    - the gadget of the asymmetric game, with tops also linking to a closed
      pair ``Q0 <-> Q1`` and centrals allowed to link to ``B``; centrals weigh
      each ``Z{j}`` by W and ``Q0`` by (m - 1/2) W, so ``B`` pays off only when
      every clause is satisfied, which freezes the toggling halves.
    """
    nv, m = f.num_vars, len(f.clauses)
    names: list[str] = []
    for i in range(1, nv + 1):
        names += [f"V{i}", f"T{i}", f"F{i}"]
    names += ["D", "D2"]
    for j in range(m):
        names += [f"I{j}.{a}" for a in range(3)] + [f"P{j}.{a}" for a in range(3)] + [f"Z{j}", f"K{j}"]
    names += ["B", "Q0", "Q1"] + list(ROLES)
    n = len(names)
    assert n == SAT_SIZE[0] * nv + SAT_SIZE[1] * m + SAT_SIZE[2]
    if M is None:
        M = 1000.0 * n
    ix = {s: i for i, s in enumerate(names)}
    w = np.zeros((n, n))
    allowed: list[tuple[int, ...]] = [()] * n
    budgets = [1] * n
    G = 10.0 * n  # intermediary's stake in its literal
    W = 1.0

    def allow(v, *ts):
        allowed[ix[v]] = tuple(sorted(ix[t] for t in ts))

    for i in range(1, nv + 1):
        allow(f"V{i}", f"T{i}", f"F{i}")
        allow(f"T{i}", "D")
        allow(f"F{i}", "D")
    allow("D", "D2")
    allow("D2", "D")
    for j, clause in enumerate(f.clauses):
        for a, lit in enumerate(clause):
            var = abs(lit)
            lit_node = f"T{var}" if lit > 0 else f"F{var}"
            allow(f"I{j}.{a}", f"P{j}.{a}", "D")
            w[ix[f"I{j}.{a}"], ix[lit_node]] = G
            w[ix[f"I{j}.{a}"], ix["D"]] = 1.0
            allow(f"P{j}.{a}", f"V{var}", f"Z{j}")
            budgets[ix[f"P{j}.{a}"]] = 2
        allow(f"Z{j}", "D")
        allow(f"K{j}", *(f"I{j}.{a}" for a in range(3)))
        w[ix[f"K{j}"], ix[f"Z{j}"]] = 1.0
    allow("B", *(f"K{j}" for j in range(m)))
    budgets[ix["B"]] = m
    allow("Q0", "Q1")
    allow("Q1", "Q0")

    gad = asymmetric_gadget(M)
    for v in range(11):
        role = ROLES[v]
        src = ix[role]
        for u in range(11):
            w[src, ix[ROLES[u]]] = gad.game.weights[v, u]
        allowed[src] = tuple(sorted(ix[ROLES[u]] for u in gad.game.allowed[v]))
    for h, c, lt, rt, lb, rb in _halves():
        allowed[ix[c]] = tuple(sorted(allowed[ix[c]] + (ix["B"],)))
        w[ix[c], ix[f"{'1' if h == '0' else '0'}C"]] = W / 4
        for j in range(m):
            w[ix[c], ix[f"Z{j}"]] = W
        w[ix[c], ix["Q0"]] = (m - 0.5) * W
        for top in (lt, rt):
            allowed[ix[top]] = tuple(sorted(allowed[ix[top]] + (ix["Q0"],)))
            budgets[ix[top]] = 2
    g = GameInstance.build(w, budgets, allowed, M=M)
    return SatInstance(g, f, tuple(names))


def variable_gadget() -> tuple[GameInstance, tuple[str, ...]]:
    """One variable of the reduction in isolation: V picks T or F, both feed D <-> D2."""
    names = ("V", "T", "F", "D", "D2")
    allowed = [(1, 2), (3,), (3,), (4,), (3,)]
    return GameInstance.build(np.zeros((5, 5)), 1, allowed, M=100.0), names


def sat_ne_search(inst: SatInstance, budget: int = 5_000_000) -> SearchResult:
    return exhaustive_ne_search(inst.game, budget=budget)
