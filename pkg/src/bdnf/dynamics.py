"""Best-response walks: schedulers, traces, loop detection, convergence checks."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .game import GameInstance, best_response, costs, uniform_game
from .graph import Wiring, all_pairs_distances

SCHEDULERS = ("round-robin", "round-robin-shuffled", "max-cost-first", "random", "tail-first")


@dataclass(frozen=True)
class Scheduler:
    """Who moves next.

    ``round-robin`` cycles through ``order`` (identity by default),
    ``round-robin-shuffled`` draws a fresh permutation each round, ``random``
    picks a node uniformly each step, ``max-cost-first`` lets the costliest
    unstable node move (lowest id on ties), and ``tail-first`` orders each
    round from the in-degree-0 tail of a single-link wiring along its links.
    """

    kind: str = "round-robin"
    order: tuple[int, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SCHEDULERS:
            raise ValueError(f"unknown scheduler {self.kind!r}; choose from {SCHEDULERS}")

    @property
    def round_based(self) -> bool:
        return self.kind in ("round-robin", "round-robin-shuffled", "tail-first")

    @property
    def detects_loops(self) -> bool:
        return self.kind in ("round-robin", "max-cost-first", "tail-first")


@dataclass(frozen=True)
class StepRecord:
    step: int
    node: int
    old_targets: tuple[int, ...]
    new_targets: tuple[int, ...]
    old_cost: float
    new_cost: float


@dataclass(frozen=True)
class Termination:
    kind: str  # Stable | LoopDetected | StepLimit
    step: int
    period: int | None = None
    first_seen: int | None = None


@dataclass
class WalkTrace:
    records: list[StepRecord]
    termination: Termination
    steps: int
    connectivity_step: int | None
    reach_history: list[int]
    final: Wiring
    violations: list[str] = field(default_factory=list)

    @property
    def deviations(self) -> int:
        return len(self.records)

    def loop_records(self) -> list[StepRecord]:
        """Deviations inside the detected loop period."""
        t = self.termination
        if t.kind != "LoopDetected":
            return []
        return [r for r in self.records if t.first_seen < r.step <= t.step]

    def to_text(self) -> str:
        lines = ["step,node,old_targets|new_targets,old_cost,new_cost"]
        for r in self.records:
            old = " ".join(map(str, r.old_targets))
            new = " ".join(map(str, r.new_targets))
            lines.append(f"{r.step},{r.node},{old}|{new},{r.old_cost:.12g},{r.new_cost:.12g}")
        t = self.termination
        summary = f"# termination={t.kind} at_step={t.step} steps={self.steps} deviations={self.deviations}"
        if t.period is not None:
            summary += f" period={t.period}"
        summary += f" connectivity_step={self.connectivity_step}"
        lines.append(summary)
        return "\n".join(lines) + "\n"


def step(g: GameInstance, w: Wiring, v: int) -> tuple[Wiring, bool]:
    """One turn for ``v``: switch to its best response if that strictly helps."""
    br = best_response(g, w, v)
    if br.improved:
        return w.with_targets(v, br.targets), True
    return w, False


def _all_settled(g: GameInstance, w: Wiring) -> bool:
    return not any(best_response(g, w, u).improved for u in range(g.n))


def _reach(w: Wiring) -> np.ndarray:
    return (all_pairs_distances(w) > 0).sum(axis=1)


def tail_first_order(w: Wiring) -> list[int]:
    """Round order starting at a node nobody links to, then following first links."""
    indeg = w.in_degrees()
    tails = [v for v in range(w.n) if indeg[v] == 0]
    start = tails[0] if tails else 0
    order, seen, v = [], set(), start
    while v not in seen:
        order.append(v)
        seen.add(v)
        if not w.out_edges[v]:
            break
        v = w.out_edges[v][0]
    return order + [u for u in range(w.n) if u not in seen]


def _rounds(sched: Scheduler, n: int, rng: random.Random, current) -> Iterator[tuple[list[int], object]]:
    """Yield (round order, phase tag) pairs forever."""
    base = list(sched.order) if sched.order is not None else list(range(n))
    if sorted(base) != list(range(n)):
        raise ValueError("round-robin order must be a permutation of the nodes")
    while True:
        if sched.kind == "round-robin-shuffled":
            rng.shuffle(base)
            yield list(base), None
        elif sched.kind == "tail-first":
            order = tail_first_order(current())
            yield order, tuple(order)
        else:
            yield base, None


def run_walk(
    g: GameInstance,
    w0: Wiring,
    sched: Scheduler | None = None,
    max_steps: int = 100_000,
    check_lemmas: bool | None = None,
    stop_when_connected: bool = False,
) -> WalkTrace:
    """Run a best-response walk until stable, looping, or out of steps.

    Lemma checks (on by default for uniform games) compare reach before and
    after each deviation while the wiring is not strongly connected, and the
    minimum reach across each round.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    sched = sched or Scheduler()
    if check_lemmas is None:
        check_lemmas = g.is_uniform()
    n = g.n
    rng = random.Random(sched.seed)
    w = w0
    records: list[StepRecord] = []
    violations: list[str] = []
    reach_history: list[int] = []
    seen: dict = {}
    t = 0

    reach = _reach(w)
    connected = bool((reach == n - 1).all())
    conn_step = 0 if connected else None

    def finish(kind, period=None, first=None):
        return WalkTrace(records, Termination(kind, t, period, first), t, conn_step, reach_history, w, violations)

    def apply(v, br):
        nonlocal w, reach, connected, conn_step
        old = w.out_edges[v]
        w = w.with_targets(v, br.targets)
        records.append(StepRecord(t, v, tuple(old), tuple(br.targets), br.current_cost, br.cost))
        if connected:
            return
        new_reach = _reach(w)
        if check_lemmas:
            if new_reach[v] < reach[v]:
                violations.append(f"step {t}: node {v} reach fell {reach[v]} -> {new_reach[v]}")
            for u in range(n):
                if u != v and new_reach[u] != reach[u] and new_reach[u] < new_reach[v]:
                    violations.append(f"step {t}: node {u} reach {reach[u]} -> {new_reach[u]} below mover's {new_reach[v]}")
        reach = new_reach
        if (reach == n - 1).all():
            connected = True
            conn_step = t

    if sched.kind == "max-cost-first":
        while t < max_steps:
            key = w.key()
            if key in seen:
                return finish("LoopDetected", t - seen[key], seen[key])
            seen[key] = t
            c = costs(g, w)
            for v in sorted(range(n), key=lambda u: (-c[u], u)):
                br = best_response(g, w, v)
                if br.improved:
                    t += 1
                    apply(v, br)
                    break
            else:
                return finish("Stable")
            if stop_when_connected and connected:
                return finish("Connected")
        return finish("StepLimit")

    if sched.kind == "random":
        quiet = 0
        while t < max_steps:
            v = rng.randrange(n)
            br = best_response(g, w, v)
            t += 1
            if br.improved:
                apply(v, br)
                quiet = 0
                if stop_when_connected and connected:
                    return finish("Connected")
            else:
                quiet += 1
                if quiet >= n:
                    if _all_settled(g, w):
                        return finish("Stable")
                    quiet = 0
        return finish("StepLimit")

    quiet = 0
    rounds = _rounds(sched, n, rng, lambda: w)
    while t < max_steps:
        order, tag = next(rounds)
        round_start_min = int(reach.min())
        lemma_round = check_lemmas and not connected and all(len(r) >= 1 for r in w.out_edges)
        for pos, v in enumerate(order):
            if sched.detects_loops:
                key = (w.key(), pos, tag)
                if key in seen:
                    return finish("LoopDetected", t - seen[key], seen[key])
                seen[key] = t
            br = best_response(g, w, v)
            t += 1
            if br.improved:
                apply(v, br)
                quiet = 0
                if stop_when_connected and connected:
                    return finish("Connected")
            else:
                quiet += 1
                # n quiet turns cover every node only when the order never changes
                if quiet >= n and (sched.kind == "round-robin" or _all_settled(g, w)):
                    reach_history.append(int(reach.min()))
                    return finish("Stable")
                if quiet >= n:
                    quiet = 0
            if t >= max_steps:
                return finish("StepLimit")
        reach_history.append(int(reach.min()))
        if lemma_round and not (reach.min() >= round_start_min + 1 or connected):
            violations.append(f"round ending at step {t}: min reach stayed at {int(reach.min())}")
    return finish("StepLimit")


def connectivity_convergence(g: GameInstance, w0: Wiring, sched: Scheduler | None = None, max_steps: int | None = None) -> WalkTrace:
    """Walk until the wiring is strongly connected (or the walk ends otherwise).

    Returns the trace; ``connectivity_step`` is None if connectivity never came.
    """
    sched = sched or Scheduler()
    if max_steps is None:
        max_steps = max(1, g.n * g.n)
    return run_walk(g, w0, sched, max_steps=max_steps, stop_when_connected=True)


def ring_path(r: int, p: int) -> Wiring:
    """Directed ring ``0 -> 1 -> ... -> r-1 -> 0`` plus a path ending at ring node 0.

    The path is ``r -> r+1 -> ... -> r+p-1 -> 0`` with tail ``r``.
    """
    if p < 1:
        raise ValueError("path needs at least one node")
    if r < p:
        raise ValueError(f"ring must hold at least half the nodes (r={r} < p={p})")
    rows = [((v + 1) % r,) for v in range(r)]
    rows += [(v + 1,) for v in range(r, r + p - 1)] + [(0,)]
    return Wiring(r + p, 1, tuple(rows))


def random_wiring(n: int, k: int, rng: random.Random, min_degree: int | None = None) -> Wiring:
    """Each node picks a uniformly random degree in [min_degree, k] and random targets."""
    lo = k if min_degree is None else min_degree
    rows = []
    for v in range(n):
        d = rng.randint(lo, k)
        others = [u for u in range(n) if u != v]
        rows.append(tuple(rng.sample(others, d)))
    return Wiring(n, k, tuple(rows))


def hamiltonian_plus_random(n: int, k: int, rng: random.Random) -> Wiring:
    """Directed Hamiltonian cycle plus ``k-1`` extra random out-links per node."""
    rows = []
    for v in range(n):
        nxt = (v + 1) % n
        others = [u for u in range(n) if u not in (v, nxt)]
        rows.append((nxt,) + tuple(rng.sample(others, k - 1)))
    return Wiring(n, k, tuple(rows))


@dataclass(frozen=True)
class LoopingConfig:
    wiring: Wiring
    order: tuple[int, ...]
    trace: WalkTrace
    attempts: int


def find_looping_config(n: int, k: int, seed: int = 0, budget: int = 5000, rounds: int = 60,
                        identity_order: bool = False) -> LoopingConfig | None:
    """Seeded search for a start wiring and round order whose walk loops.

    With ``identity_order`` only the wiring is drawn and nodes move in id order.
    """
    g = uniform_game(n, k)
    rng = random.Random(seed)
    for attempt in range(1, budget + 1):
        w0 = random_wiring(n, k, rng)
        order = list(range(n))
        if not identity_order:
            rng.shuffle(order)
        trace = run_walk(g, w0, Scheduler("round-robin", tuple(order)), max_steps=rounds * n, check_lemmas=False)
        if trace.termination.kind == "LoopDetected":
            return LoopingConfig(w0, tuple(order), trace, attempt)
    return None


def replay_loop(g: GameInstance, cfg: LoopingConfig) -> bool:
    """Re-run the loop's deviations from the looping state and confirm it comes back."""
    t = cfg.trace
    loop = t.loop_records()
    if not loop:
        return False
    # rebuild the wiring at the first visit of the repeated state
    w = cfg.wiring
    for r in t.records:
        if r.step > t.termination.first_seen:
            break
        w = w.with_targets(r.node, r.new_targets)
    start = w.key()
    for r in loop:
        if tuple(w.out_edges[r.node]) != r.old_targets:
            return False
        br = best_response(g, w, r.node)
        if not br.improved or tuple(br.targets) != r.new_targets:
            return False
        w = w.with_targets(r.node, r.new_targets)
    return w.key() == start
