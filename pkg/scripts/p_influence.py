"""Iterations to tolerance and reduced-precision plateau for p = 1..4.

    python3 scripts/p_influence.py --n 64 --formats half,fixed:i13f18
"""

import argparse

from invroot.matgen import OverlapSpec, gen_overlap
from invroot.solver import SolverConfig, solve
from invroot.sweep import ALL_ARITHMETIC, run_cell


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--formats", default="half,fixed:i13f18")
    ap.add_argument("--tol", type=float, default=1e-10)
    args = ap.parse_args()
    formats = args.formats.split(",")

    print("seed  p  exact-iters  " + "  ".join(f"{f:>16s}" for f in formats))
    for seed in range(args.seeds):
        A = gen_overlap(OverlapSpec(n=args.n, seed=seed))
        for p in (1, 2, 3, 4):
            its = solve(A, SolverConfig(p=p, residual_tol=args.tol)).iterations
            plateaus = [run_cell(A, p, ALL_ARITHMETIC, f, 25, args.tol).plateau for f in formats]
            print(f"{seed:4d} {p:2d} {its:12d}  " + "  ".join(f"{v:16.3e}" for v in plateaus))


if __name__ == "__main__":
    main()
