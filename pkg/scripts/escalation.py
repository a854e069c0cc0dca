"""Dynamic precision scaling: start narrow, switch up when progress stalls.

    python3 scripts/escalation.py --n 128 --start float:e11m10 --then exact --trace results/escalation.csv
"""

import argparse
import os
import warnings

from invroot.matgen import OverlapSpec, gen_overlap
from invroot.matrix import parse_model
from invroot.solver import SolverConfig, solve, write_trace_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--start", default="float:e11m10")
    ap.add_argument("--then", default="exact", help="comma-separated, increasing precision")
    ap.add_argument("--trace", default="results/escalation.csv")
    args = ap.parse_args()

    A = gen_overlap(OverlapSpec(n=args.n, seed=args.seed))
    cfg = SolverConfig(
        p=args.p,
        arith=parse_model(args.start),
        escalation=tuple(parse_model(m) for m in args.then.split(",")),
        max_iters=200,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tr = solve(A, cfg)
    for r in tr.records:
        print(f"{r.k:3d} {r.arith:14s} residual={r.residual_fro:.3e}")
    print(f"outcome={tr.outcome}, switched at iterations {tr.escalations}")
    os.makedirs(os.path.dirname(args.trace) or ".", exist_ok=True)
    write_trace_csv(tr, args.trace)


if __name__ == "__main__":
    main()
