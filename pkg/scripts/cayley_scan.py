"""Dense Abelian Cayley stability scan and the unstable share of sampled sparse circulants."""
import argparse

from bdnf.cayley import cayley_stability, circulant_spec, dense_cayley_stability_scan, hypercube_spec, instability_probe


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=12)
    ap.add_argument("--probe-k", type=int, default=2)
    ap.add_argument("--probe-n", default="8,12,16,24,32")
    args = ap.parse_args()
    for n in range(2, args.max_n + 1):
        rep = dense_cayley_stability_scan(n, include_boundary=True)
        below = sum(s for _, s in rep.boundary)
        print(f"n={n:2d} dense graphs {rep.checked:5d} counterexamples {len(rep.counterexamples)} "
              f"largest sparse k: {below}/{len(rep.boundary)} stable")
    for name, spec in [("5-cube", hypercube_spec(5))] + [(f"C{n}(1,2)", circulant_spec(n, [1, 2])) for n in (16, 24, 32)]:
        v = cayley_stability(spec)
        tail = "" if v.stable else f" witness node {v.witness.node} -> {v.witness.targets}, cost {v.replay[0]:g} -> {v.replay[1]:g}"
        print(f"{name}: {'stable' if v.stable else 'unstable'}{tail}")
    ns = [int(x) for x in args.probe_n.split(",")]
    for n, frac in instability_probe(args.probe_k, ns).items():
        print(f"k={args.probe_k} n={n}: {frac:.0%} of sampled circulants unstable")


if __name__ == "__main__":
    main()
