"""Plateau residual vs. number of bits, float and fixed point, both approximation modes.

    python3 scripts/precision_sweep.py --n 128 --out results/precision
"""

import argparse

from invroot.matgen import OverlapSpec
from invroot.sweep import MODES, SweepSpec, run_sweep

FLOAT_BITS = (4, 6, 8, 10, 14, 18, 23)
FIXED_BITS = (4, 8, 12, 18, 26)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--density", type=float, default=0.25)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--max-iters", type=int, default=25)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="results/precision")
    args = ap.parse_args()

    formats = [f"float:e11m{m}" for m in FLOAT_BITS] + [f"fixed:i13f{f}" for f in FIXED_BITS]
    spec = SweepSpec(
        matrix=OverlapSpec(n=args.n, target_density=args.density, seed=args.seed),
        p_values=[args.p],
        modes=list(MODES),
        formats=formats,
        max_iters=args.max_iters,
        out_dir=args.out,
    )
    results = run_sweep(spec, jobs=args.jobs)
    print(f"{'format':16s} {'all-arithmetic':>16s} {'storage-only':>16s}")
    by_key = {(r.mode, r.fmt): r for r in results}
    for fmt in formats:
        a, s = by_key[("all-arithmetic", fmt)], by_key[("storage-only", fmt)]
        print(f"{fmt:16s} {a.plateau:16.3e} {s.plateau:16.3e}")
    print(f"traces in {args.out}")


if __name__ == "__main__":
    main()
