"""Abelian Cayley wirings, path-label embeddings and the root-doubling deviation.

A group is a product of cyclic factors ``Z_m1 x ... x Z_mr``; elements are
residue vectors, indexed as node ids in mixed radix (first factor most
significant).  Circulants ("regular wirings") are the single-factor case.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .game import Deviation, is_stable, node_cost, replay_deviation, uniform_game
from .graph import Wiring, all_pairs_distances, diameter

Element = tuple[int, ...]


@dataclass(frozen=True)
class CayleySpec:
    factors: tuple[int, ...]
    generators: tuple[Element, ...]

    def __post_init__(self):
        factors = tuple(int(m) for m in self.factors)
        if not factors or any(m < 1 for m in factors):
            raise ValueError(f"factors must be positive, got {factors}")
        gens = []
        for a in self.generators:
            a = (int(a),) if isinstance(a, (int, np.integer)) else tuple(int(x) for x in a)
            if len(a) != len(factors):
                raise ValueError(f"generator {a} does not match factors {factors}")
            gens.append(tuple(x % m for x, m in zip(a, factors)))
        if any(all(x == 0 for x in a) for a in gens):
            raise ValueError("identity generator would only add self-loops")
        if len(set(gens)) != len(gens):
            raise ValueError("generators must be pairwise distinct")
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "generators", tuple(gens))

    @property
    def n(self) -> int:
        return math.prod(self.factors)

    @property
    def k(self) -> int:
        return len(self.generators)

    def add(self, u: Element, a: Element) -> Element:
        return tuple((x + y) % m for x, y, m in zip(u, a, self.factors))

    def scale(self, a: Element, c: int) -> Element:
        return tuple((c * x) % m for x, m in zip(a, self.factors))

    def index(self, u: Element) -> int:
        i = 0
        for x, m in zip(u, self.factors):
            i = i * m + x
        return i

    def element(self, i: int) -> Element:
        out = []
        for m in reversed(self.factors):
            i, x = divmod(i, m)
            out.append(x)
        return tuple(reversed(out))

    def elements(self) -> list[Element]:
        return list(itertools.product(*(range(m) for m in self.factors)))

    def walk(self, start: Element, label: Sequence[int]) -> Element:
        """Endpoint of any path from ``start`` using ``label[i]`` copies of generator i."""
        u = start
        for a, c in zip(self.generators, label):
            u = self.add(u, self.scale(a, c))
        return u

    @property
    def identity(self) -> Element:
        return (0,) * len(self.factors)


def parse_spec(factors: str, generators: str) -> CayleySpec:
    """CLI text form: ``"2,2,2"`` and ``"1,0,0;0,1,0;0,0,1"``."""
    fs = tuple(int(x) for x in factors.split(","))
    gs = tuple(tuple(int(x) for x in g.split(",")) for g in generators.split(";") if g.strip())
    return CayleySpec(fs, gs)


def generate_cayley(spec: CayleySpec) -> Wiring:
    rows = []
    for u in spec.elements():
        rows.append(tuple(spec.index(spec.add(u, a)) for a in spec.generators))
    return Wiring(spec.n, spec.k, tuple(rows))


def regular_wiring(n: int, offsets: Iterable[int]) -> Wiring:
    """Circulant wiring: the i-th link of ``x`` goes to ``x + offsets[i] mod n``."""
    offsets = list(offsets)
    if any(a % n == 0 for a in offsets):
        raise ValueError("offset congruent to 0 would be a self-loop")
    return generate_cayley(CayleySpec((n,), tuple((a,) for a in offsets)))


def hypercube_spec(k: int) -> CayleySpec:
    gens = tuple(tuple(int(i == j) for j in range(k)) for i in range(k))
    return CayleySpec((2,) * k, gens)


def circulant_spec(n: int, offsets: Iterable[int]) -> CayleySpec:
    return CayleySpec((n,), tuple((a,) for a in offsets))


@dataclass(frozen=True)
class LabelSets:
    """Shortest-path labels from node 0 and the per-generator sets S_i."""

    labels: tuple[frozenset[tuple[int, ...]], ...]
    S: tuple[frozenset[int], ...]


def label_sets(spec: CayleySpec, w: Wiring | None = None) -> LabelSets:
    """Every minimal-length label of every node, grown level by level.

    A shortest label minus one unit in any positive coordinate is again a
    shortest label (of the predecessor), so extending level L-1 labels by one
    generator and keeping those that land on a node at distance L is exact.
    """
    w = generate_cayley(spec) if w is None else w
    dist = all_pairs_distances(w)[0]
    if (dist < 0).any():
        raise ValueError("label sets need a strongly connected wiring")
    labels: list[set[tuple[int, ...]]] = [set() for _ in range(spec.n)]
    level = {(0,) * spec.k}
    labels[0].add((0,) * spec.k)
    depth = 0
    while level:
        depth += 1
        nxt = set()
        for x in level:
            for i in range(spec.k):
                y = x[:i] + (x[i] + 1,) + x[i + 1:]
                v = spec.index(spec.walk(spec.identity, y))
                if dist[v] == depth:
                    nxt.add(y)
                    labels[v].add(y)
        level = nxt
    S = tuple(
        frozenset(v for v in range(spec.n) if any(x[i] >= 2 for x in labels[v]))
        for i in range(spec.k)
    )
    return LabelSets(tuple(frozenset(s) for s in labels), S)


@dataclass(frozen=True)
class RootDeviation:
    generator: int
    applicable: bool
    gain_lower_bound: int | None
    exact_delta: float | None
    new_target: int | None
    reason: str = ""


def root_deviation_gain(spec: CayleySpec, w: Wiring | None, i: int) -> RootDeviation:
    """Swap node 0's i-edge for the doubled step ``a_i + a_i``.

    ``gain_lower_bound`` is ``|S_i| - (diameter + 2)``; ``exact_delta`` is the
    measured cost drop (positive means the swap helps).  The swap is not a
    legal rewiring when ``2 a_i`` is the identity or an existing target.
    """
    if not 0 <= i < spec.k:
        raise IndexError(f"generator index {i} out of range for k={spec.k}")
    w = generate_cayley(spec) if w is None else w
    a = spec.generators[i]
    target = spec.index(spec.add(a, a))
    old = tuple(w.out_edges[0])
    if target == 0:
        return RootDeviation(i, False, None, None, None, "doubled generator is the identity")
    if target in old:
        return RootDeviation(i, False, None, None, target, "doubled generator is already a target")
    new = tuple(target if t == spec.index(a) else t for t in old)
    g = uniform_game(spec.n, spec.k)
    before = node_cost(g, w, 0)
    after = node_cost(g, w.with_targets(0, new), 0)
    d = diameter(w)
    bound = None
    if d is not None:
        bound = len(label_sets(spec, w).S[i]) - (d + 2)
    return RootDeviation(i, True, bound, before - after, target)


@dataclass(frozen=True)
class CayleyVerdict:
    spec: CayleySpec
    stable: bool
    witness: Deviation | None
    replay: tuple[float, float] | None


def cayley_stability(spec: CayleySpec) -> CayleyVerdict:
    """Exact stability via node 0 alone; translations make every node alike."""
    w = generate_cayley(spec)
    g = uniform_game(spec.n, spec.k)
    res = is_stable(g, w, nodes=[0])
    replay = replay_deviation(g, w, res.witness) if res.witness else None
    return CayleyVerdict(spec, res.stable, res.witness, replay)


def _partitions(e: int, largest: int | None = None):
    largest = e if largest is None else largest
    if e == 0:
        yield ()
        return
    for first in range(min(e, largest), 0, -1):
        for rest in _partitions(e - first, first):
            yield (first,) + rest


def _prime_powers(n: int) -> list[tuple[int, int]]:
    out, p = [], 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
        p += 1
    if n > 1:
        out.append((n, 1))
    return out


def abelian_groups(n: int) -> list[tuple[int, ...]]:
    """Abelian groups of order ``n`` as prime-power cyclic factor lists."""
    if n < 1:
        raise ValueError("order must be positive")
    if n == 1:
        return [(1,)]
    per_prime = [[tuple(p ** part for part in lam) for lam in _partitions(e)] for p, e in _prime_powers(n)]
    return [tuple(f for block in choice for f in block) for choice in itertools.product(*per_prime)]


@dataclass
class ScanReport:
    n: int
    checked: int = 0
    counterexamples: list[CayleySpec] = field(default_factory=list)
    boundary: list[tuple[CayleySpec, bool]] = field(default_factory=list)

    @property
    def all_stable(self) -> bool:
        return not self.counterexamples


SCAN_CAP = 64


def dense_cayley_stability_scan(n: int, include_boundary: bool = False) -> ScanReport:
    """Check every Abelian Cayley graph of order ``n`` with ``k > (n - 2) / 2``.

    With ``include_boundary`` the largest k outside that range is also
    checked and reported separately (it never counts as a counterexample).
    """
    if n > SCAN_CAP:
        raise ValueError(f"scan capped at n <= {SCAN_CAP}")
    report = ScanReport(n)
    k_min = (n - 2) // 2 + 1
    for factors in abelian_groups(n):
        probe = CayleySpec(factors, ())
        others = [u for u in probe.elements() if u != probe.identity]
        for k in range(max(1, k_min - include_boundary), n):
            if k > len(others):
                break
            for gens in itertools.combinations(others, k):
                spec = CayleySpec(factors, gens)
                stable = cayley_stability(spec).stable
                if 2 * k > n - 2:
                    report.checked += 1
                    if not stable:
                        report.counterexamples.append(spec)
                else:
                    report.boundary.append((spec, stable))
    return report


def instability_probe(k: int, ns: Iterable[int], max_sets: int = 200, seed: int = 0) -> dict[int, float]:
    """Fraction of sampled circulants of degree ``k`` that are unstable, per ``n``."""
    rng = np.random.default_rng(seed)
    out = {}
    for n in ns:
        sets = list(itertools.combinations(range(1, n), k))
        if len(sets) > max_sets:
            pick = rng.choice(len(sets), size=max_sets, replace=False)
            sets = [sets[j] for j in sorted(pick)]
        bad = sum(not cayley_stability(circulant_spec(n, s)).stable for s in sets)
        out[n] = bad / len(sets)
    return out
