"""Build and exactly check a stable wiring at every grid point; report recipe usage and invariants."""
import argparse
import collections
import math

from bdnf.construct import construct
from bdnf.game import costs, is_stable, uniform_game
from bdnf.graph import diameter

GRID = {1: 300, 2: 120, 3: 50, 4: 30, 5: 30}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", default="1,2,3,4,5")
    args = ap.parse_args()
    methods = collections.Counter()
    failures = []
    for k in (int(x) for x in args.k.split(",")):
        for n in range(k + 1, GRID[k] + 1):
            rep = construct(n, k)
            g = uniform_game(n, k)
            methods[rep.method] += 1
            if not is_stable(g, rep.wiring):
                failures.append((n, k))
                continue
            if k >= 2:
                c = costs(g, rep.wiring)
                spread = int(c.max() - c.min())
                d = diameter(rep.wiring)
                bound = 2 * math.sqrt(2 * n + n * math.log(n, k)) + 2
                print(f"n={n:3d} k={k} {rep.method:18s} spread={spread:4d} diameter={d} (bound {bound:.1f})")
    print("recipes:", dict(methods))
    print("failures:", failures)


if __name__ == "__main__":
    main()
