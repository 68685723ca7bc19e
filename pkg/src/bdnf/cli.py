"""Command line entry point: ``bdnf <subcommand> ...``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io as bio
from .cayley import CayleySpec, cayley_stability, generate_cayley
from .construct import construct
from .dynamics import SCHEDULERS, Scheduler, find_looping_config, run_walk
from .experiments import FAMILIES, CapExceeded, ExperimentConfig, check_cap, rows_to_csv, run_convergence_experiment
from .gadgets import (
    SearchBudgetExceeded,
    asymmetric_gadget,
    exhaustive_ne_search,
    pruned_ne_search,
    sat_reduction,
    symmetric_gadget,
)
from .game import GameInstance, best_response, is_stable, replay_deviation, uniform_game


def _ints(text: str) -> tuple[int, ...]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty list {text!r}")
    return tuple(out)


def parse_generators(text: str, dim: int) -> tuple[tuple[int, ...], ...]:
    """``e1..e5`` / ``e1,e3`` unit vectors, ``1,2`` offsets of a cyclic group, or ``1,0;0,1`` vectors."""
    text = text.strip()
    if text.startswith("e"):
        idx: list[int] = []
        for part in text.split(","):
            if ".." in part:
                lo, hi = part.split("..")
                idx.extend(range(int(lo.lstrip("e")), int(hi.lstrip("e")) + 1))
            else:
                idx.append(int(part.lstrip("e")))
        if any(not 1 <= i <= dim for i in idx):
            raise ValueError(f"unit vector index out of range 1..{dim}")
        return tuple(tuple(int(j == i - 1) for j in range(dim)) for i in idx)
    if ";" not in text and dim == 1:
        return tuple((int(x),) for x in text.split(","))
    return tuple(tuple(int(x) for x in g.split(",")) for g in text.split(";") if g.strip())


def _game(args, n: int | None = None, k: int | None = None) -> GameInstance:
    if getattr(args, "game", None):
        return bio.read_game(args.game)
    if n is None:
        raise SystemExit("need --game or a wiring to take n and k from")
    check_cap(n, k)
    return uniform_game(n, k)


def _describe_deviation(g: GameInstance, w, dev) -> str:
    before, after = replay_deviation(g, w, dev)
    return (f"witness: node {dev.node} -> {' '.join(map(str, dev.targets))} "
            f"(cost {before:.12g} -> {after:.12g}, replayed)")


def cmd_construct(args) -> int:
    check_cap(args.n, args.k)
    rep = construct(args.n, args.k, verify=not args.no_verify)
    print(f"n={args.n} k={args.k} method={rep.method} verified={rep.verified}")
    for note in rep.notes:
        print(f"note: {note}")
    if args.out:
        bio.write_wiring(args.out, rep.wiring)
    else:
        sys.stdout.write(bio.serialize_wiring(rep.wiring))
    return 0


def cmd_check(args) -> int:
    w = bio.read_wiring(args.wiring)
    g = _game(args, w.n, w.k)
    res = is_stable(g, w)
    if res.stable:
        print("stable")
        return 0
    print("unstable")
    print(_describe_deviation(g, w, res.witness))
    return 1 if args.strict else 0


def cmd_best_response(args) -> int:
    w = bio.read_wiring(args.wiring)
    g = _game(args, w.n, w.k)
    br = best_response(g, w, args.node)
    print(f"node {br.node}: current {' '.join(map(str, w.out_edges[br.node]))} cost {br.current_cost:.12g}")
    print(f"best {' '.join(map(str, br.targets))} cost {br.cost:.12g} improved={br.improved}")
    return 0


def cmd_walk(args) -> int:
    w = bio.read_wiring(args.wiring)
    g = _game(args, w.n, w.k)
    order = _ints(args.order) if args.order else None
    tr = run_walk(g, w, Scheduler(args.scheduler, order, args.seed), max_steps=args.max_steps)
    t = tr.termination
    line = f"{t.kind} steps={tr.steps} deviations={tr.deviations}"
    if t.period is not None:
        line += f" period={t.period} first_seen={t.first_seen}"
    print(line)
    if tr.violations:
        print(f"lemma violations: {len(tr.violations)}")
    if args.trace:
        Path(args.trace).write_text(tr.to_text())
    if args.out:
        bio.write_wiring(args.out, tr.final)
    return 0


def cmd_cayley(args) -> int:
    factors = _ints(args.factors)
    spec = CayleySpec(factors, parse_generators(args.gens, len(factors)))
    print(f"n={spec.n} k={spec.k}")
    if args.out:
        bio.write_wiring(args.out, generate_cayley(spec))
    if args.check_stability:
        # one node's best response settles it, so the whole-wiring caps do not apply
        v = cayley_stability(spec)
        if v.stable:
            print("stable")
        else:
            before, after = v.replay
            dev = v.witness
            print("unstable")
            print(f"witness: node {dev.node} -> {' '.join(map(str, dev.targets))} "
                  f"(cost {before:.12g} -> {after:.12g}, replayed)")
    return 0


def cmd_gadget(args) -> int:
    if args.kind == "asymmetric":
        gad = asymmetric_gadget(args.M)
        res = exhaustive_ne_search(gad.game)
        label = f"restricted profiles searched: {res.visited}"
    else:
        gad = symmetric_gadget(args.M, args.gamma, args.eps)
        p = gad.params
        print(f"alpha={p.alpha:.12g} beta={p.beta:.12g} gamma={p.gamma:.12g} inequalities={p.lemma_inequalities()}")
        res, surv = pruned_ne_search(gad.game)
        label = f"survivors per node: {[len(s) for s in surv]}; partial profiles: {res.visited}"
    print(f"n={gad.game.n} k={gad.game.k}")
    print(label)
    print("pure equilibrium found" if res.found else "no pure equilibrium")
    if args.out:
        bio.write_game(args.out, gad.game)
    return 0


def cmd_reduce_sat(args) -> int:
    f = bio.read_dimacs(args.cnf)
    inst = sat_reduction(f)
    print(f"variables={f.num_vars} clauses={len(f.clauses)} nodes={inst.game.n}")
    if args.out:
        bio.write_game(args.out, inst.game)
    if args.search:
        try:
            res = exhaustive_ne_search(inst.game, budget=args.budget)
        except SearchBudgetExceeded as e:
            print(f"search budget exceeded: {e}")
            return 2
        print("pure equilibrium found" if res.found else "no pure equilibrium")
    return 0


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig(
        n_range=_ints(args.n), k_range=_ints(args.k), trials=args.trials, family=args.family,
        scheduler=args.scheduler, shuffle_order=not args.fixed_order, seed=args.seed,
        step_cap=args.step_cap, output=args.out, wiring_path=args.wiring,
    )
    rows = run_convergence_experiment(cfg)
    if not args.out:
        sys.stdout.write(rows_to_csv(rows))
    return 0


def cmd_find_loop(args) -> int:
    cfg = find_looping_config(args.n, args.k, seed=args.seed, budget=args.budget, identity_order=not args.shuffle_orders)
    if cfg is None:
        print(f"no loop within {args.budget} attempts")
        return 1
    t = cfg.trace.termination
    print(f"LoopDetected attempt={cfg.attempts} period={t.period} deviations_in_period={len(cfg.trace.loop_records())}")
    print(f"order {','.join(map(str, cfg.order))}")
    w = cfg.wiring
    if args.out:
        bio.write_wiring(args.out, w)
    else:
        sys.stdout.write(bio.serialize_wiring(w))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bdnf", description="Bounded-degree network formation games")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("construct", help="build a stable uniform wiring")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--out")
    s.add_argument("--no-verify", action="store_true")
    s.set_defaults(fn=cmd_construct)

    s = sub.add_parser("check", help="exact stability check")
    s.add_argument("--wiring", required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--game")
    g.add_argument("--uniform", action="store_true")
    s.add_argument("--strict", action="store_true", help="exit 1 when unstable")
    s.set_defaults(fn=cmd_check)

    s = sub.add_parser("best-response", help="best response of one node")
    s.add_argument("--wiring", required=True)
    s.add_argument("--node", type=int, required=True)
    s.add_argument("--game")
    s.set_defaults(fn=cmd_best_response)

    s = sub.add_parser("walk", help="best-response walk")
    s.add_argument("--wiring", required=True)
    s.add_argument("--game")
    s.add_argument("--scheduler", choices=SCHEDULERS, default="round-robin")
    s.add_argument("--order", help="round-robin order, e.g. 3,0,1,2")
    s.add_argument("--max-steps", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trace")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_walk)

    s = sub.add_parser("cayley", help="Abelian Cayley wiring")
    s.add_argument("--factors", required=True, help="cyclic factor orders, e.g. 2,2,2")
    s.add_argument("--gens", required=True, help="e1..e5, 1,2 (cyclic) or 1,0;0,1")
    s.add_argument("--check-stability", action="store_true")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_cayley)

    s = sub.add_parser("gadget", help="games without pure equilibria")
    s.add_argument("kind", choices=("asymmetric", "symmetric"))
    s.add_argument("--M", type=float, default=100.0)
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--eps", type=float, default=0.01)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_gadget)

    s = sub.add_parser("reduce-sat", help="3SAT formula to game")
    s.add_argument("--cnf", required=True)
    s.add_argument("--out")
    s.add_argument("--search", action="store_true")
    s.add_argument("--budget", type=int, default=5_000_000)
    s.set_defaults(fn=cmd_reduce_sat)

    s = sub.add_parser("experiment", help="experiment grids")
    esub = s.add_subparsers(dest="experiment", required=True)
    e = esub.add_parser("convergence", help="walk lengths over an (n, k) grid")
    e.add_argument("--n", required=True, help="e.g. 8,16,24 or 8..12")
    e.add_argument("--k", required=True)
    e.add_argument("--trials", type=int, default=10)
    e.add_argument("--family", choices=FAMILIES, default="regular")
    e.add_argument("--scheduler", choices=SCHEDULERS, default="round-robin")
    e.add_argument("--fixed-order", action="store_true", help="identity round-robin order in every trial")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--step-cap", type=int, default=200_000)
    e.add_argument("--wiring")
    e.add_argument("--out")
    e.set_defaults(fn=cmd_experiment)

    s = sub.add_parser("find-loop", help="search for a looping round-robin walk")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--budget", type=int, default=5000)
    s.add_argument("--shuffle-orders", action="store_true",
                   help="also draw the round-robin order (walk then needs --order)")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_find_loop)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, CapExceeded, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
