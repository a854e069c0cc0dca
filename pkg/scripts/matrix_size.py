"""Fixed-point plateau as the matrix grows and gets sparser (density halves as N doubles).

Larger, sparser matrices have smaller entries in their inverse roots, which a
short fractional part rounds away.

    python3 scripts/matrix_size.py --frac-bits 8,12,18
"""

import argparse
import csv
import os
import warnings

from invroot.fixedpoint import FixedFormat
from invroot.matgen import OverlapSpec, gen_overlap
from invroot.solver import SolverConfig, phase_summary, solve

SIZES = ((32, 0.25), (64, 0.124), (128, 0.062), (256, 0.031))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--frac-bits", default="8,12,18")
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--max-iters", type=int, default=20)
    ap.add_argument("--out", default="results/matrix_size.csv")
    args = ap.parse_args()
    bits = [int(b) for b in args.frac_bits.split(",")]

    rows = []
    for n, d in SIZES:
        A = gen_overlap(OverlapSpec(n=n, target_density=d))
        for f in bits:
            cfg = SolverConfig(p=args.p, arith=FixedFormat(13, f), max_iters=args.max_iters)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                tr = solve(A, cfg)
            _, plateau = phase_summary(tr)
            rows.append((n, d, f, tr.outcome, plateau))
            print(f"N={n:4d} density={d:<6} f={f:2d} {tr.outcome:15s} plateau={plateau:.3e}")

    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "density", "frac_bits", "outcome", "plateau"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
