"""Walk lengths from regular and random starts over an (n, k) grid; CSV plus a variance table.

    python scripts/convergence_grid.py --n 8,16,24,32,40,48 --k 2,3 --out results/
"""
import argparse
from pathlib import Path

from bdnf.experiments import ExperimentConfig, rows_to_csv, run_convergence_experiment, summarize, variance_comparison


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", default="8,16,24,32,40,48")
    ap.add_argument("--k", default="2,3")
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--step-cap", type=int, default=200_000)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ns = tuple(int(x) for x in args.n.split(","))
    ks = tuple(int(x) for x in args.k.split(","))

    rows = []
    for family in ("regular", "random"):
        cfg = ExperimentConfig(ns, ks, trials=args.trials, family=family, seed=args.seed,
                               step_cap=args.step_cap, output=str(out / f"convergence_{family}.csv"))
        rows += run_convergence_experiment(cfg)
    (out / "convergence_all.csv").write_text(rows_to_csv(rows))

    print(f"{'n':>3} {'k':>2} {'family':>8} {'mean':>10} {'variance':>14} all_stable")
    for c in summarize(rows):
        print(f"{c.n:>3} {c.k:>2} {c.family:>8} {c.mean_steps:>10.1f} {c.var_steps:>14.1f} {c.all_stable}")
    cmp = variance_comparison(rows)
    larger = sum(a > b for a, b in cmp.values())
    print(f"random variance larger than regular in {larger}/{len(cmp)} cells")


if __name__ == "__main__":
    main()
