"""No-equilibrium certificates for the gadgets, an eps sweep for the symmetric one, and SAT discrimination."""
import argparse
import time

from bdnf.gadgets import (
    CnfFormula,
    asymmetric_gadget,
    exhaustive_ne_search,
    lifted_asymmetric_gadget,
    pruned_ne_search,
    sat_ne_search,
    sat_reduction,
    symmetric_gadget,
)

FORMULAS = [
    ((1, 2, -3),), ((1, 1, 1),), ((-1, -1, -1), (2, 2, 1)), ((1, 2, 3), (-1, -2, -3)),
    ((1, 2, 2), (-1, 2, 2), (1, -2, -2)), ((1, 1, 1), (-1, -1, -1)),
    ((1, 2, 2), (1, -2, -2), (-1, 2, 2), (-1, -2, -2)), ((1, 1, 1), (-1, 2, 2), (-2, -2, -2)),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", default="0.01,0.02,0.03,0.05,0.1,0.5")
    ap.add_argument("--skip-sat", action="store_true")
    args = ap.parse_args()
    for name, gad in [("asymmetric", asymmetric_gadget()), ("lifted k=2", lifted_asymmetric_gadget())]:
        res = exhaustive_ne_search(gad.game)
        print(f"{name}: n={gad.game.n} visited={res.visited} equilibrium={res.found}")
    for eps in (float(x) for x in args.eps.split(",")):
        t = time.time()
        res, surv = pruned_ne_search(symmetric_gadget(eps=eps).game, budget=50_000_000)
        print(f"symmetric eps={eps:g}: survivors {[len(s) for s in surv]} visited={res.visited} "
              f"equilibrium={res.found} ({time.time() - t:.1f}s)")
    if args.skip_sat:
        return
    for clauses in FORMULAS:
        f = CnfFormula(max(abs(x) for c in clauses for x in c), clauses)
        inst = sat_reduction(f)
        res = sat_ne_search(inst, budget=50_000_000)
        print(f"{clauses}: satisfiable={f.satisfiable()} nodes={inst.game.n} equilibrium={res.found}")


if __name__ == "__main__":
    main()
