"""Command-line harness: ``gen``, ``solve``, ``sweep``, ``validate``.

Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .errors import InvalidInputError
from .matgen import MatrixMarketError, OverlapSpec, gen_overlap, load_matrix, save_matrix
from .matrix import parse_model
from .oracle import NotSPDError, reference_inv_proot
from .solver import (
    DIVERGED,
    NON_FINITE,
    SolverConfig,
    phase_summary,
    residual_matrix,
    solve,
    write_trace_csv,
    write_trace_json,
)
from .sweep import MODES, SweepSpec, run_sweep

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _model(text: str):
    try:
        return parse_model(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _overlap_spec(args) -> OverlapSpec:
    try:
        return OverlapSpec(n=args.n, target_density=args.density, decay=args.decay, seed=args.seed, cond=args.cond)
    except InvalidInputError as exc:
        raise UsageError(str(exc)) from None


def _load(path: str) -> np.ndarray:
    try:
        return load_matrix(path)
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except MatrixMarketError as exc:
        raise UsageError(str(exc)) from None


def _add_gen_args(parser, required: bool):
    parser.add_argument("--n", type=int, required=required, help="matrix dimension")
    parser.add_argument("--density", type=float, default=0.25, help="fraction of non-zeros (default 0.25)")
    parser.add_argument("--decay", type=float, default=0.05, help="off-diagonal decay rate (default 0.05)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--cond", type=float, default=1.2, help="condition number bound (default 1.2)")


def cmd_gen(args) -> int:
    A = gen_overlap(_overlap_spec(args))
    save_matrix(A, args.out)
    print(f"wrote {args.out} (n={A.shape[0]}, density={np.count_nonzero(A) / A.size:.4f})")
    return EXIT_OK


def cmd_solve(args) -> int:
    A = _load(args.matrix)
    cfg = _solver_config(args)
    reference = reference_inv_proot(A, cfg.p) if args.reference == "oracle" else None
    trace = solve(A, cfg, reference=reference)
    if args.trace:
        write_trace_csv(trace, args.trace)
        write_trace_json(trace, os.path.splitext(args.trace)[0] + ".json")
    phase1_end, plateau = phase_summary(trace)
    last = trace.records[-1]
    print(f"outcome={trace.outcome} iterations={trace.iterations} residual={last.residual_fro:.6e}")
    print(f"plateau={plateau:.6e} phase1_end={phase1_end}")
    if last.error_fro is not None:
        print(f"error_vs_reference={last.error_fro:.6e}")
    if trace.escalations:
        print("escalated_at=" + ",".join(map(str, trace.escalations)))
    return EXIT_NUMERIC if trace.outcome in (DIVERGED, NON_FINITE) else EXIT_OK


def _solver_config(args) -> SolverConfig:
    try:
        return SolverConfig(
            p=args.p,
            arith=_model(args.arith),
            storage=_model(args.storage),
            max_iters=args.max_iters,
            residual_tol=args.tol,
            escalation=tuple(_model(m) for m in _csv_list(args.escalate or "")),
        )
    except InvalidInputError as exc:
        raise UsageError(str(exc)) from None


def cmd_sweep(args) -> int:
    if not args.matrix and args.n is None:
        raise UsageError("sweep needs --matrix or --n")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    source = args.matrix if args.matrix else _overlap_spec(args)
    try:
        p_values = [int(p) for p in _csv_list(args.p)]
        spec = SweepSpec(
            matrix=source,
            p_values=p_values,
            modes=_csv_list(args.mode),
            formats=_csv_list(args.formats),
            max_iters=args.max_iters,
            residual_tol=args.tol,
            out_dir=args.out,
            reference=args.reference == "oracle",
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.matrix:
        _load(args.matrix)
    results = run_sweep(spec, jobs=args.jobs)
    for r in results:
        print(f"p={r.p} {r.mode:15s} {r.fmt:16s} {r.outcome:15s} plateau={r.plateau:.3e} iters={r.iters}")
    print(f"summary: {os.path.join(args.out, 'summary.csv')}")
    return EXIT_OK


def cmd_validate(args) -> int:
    A = _load(args.matrix)
    try:
        ref = reference_inv_proot(A, args.p)
    except NotSPDError as exc:
        print(f"oracle: {exc}")
        return EXIT_NUMERIC
    trace = solve(A, SolverConfig(p=args.p, max_iters=args.max_iters, residual_tol=args.tol))
    gap = float(np.linalg.norm(trace.C - ref))
    res_oracle = float(np.linalg.norm(residual_matrix(A, ref, args.p)))
    print(f"outcome={trace.outcome} iterations={trace.iterations}")
    print(f"residual_iterative={trace.records[-1].residual_fro:.6e}")
    print(f"residual_oracle={res_oracle:.6e}")
    print(f"frobenius_gap={gap:.6e}")
    return EXIT_OK if gap <= args.gap_tol else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="invroot", description="Inverse matrix p-th roots under simulated low precision.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic overlap-like SPD matrix")
    _add_gen_args(g, required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="run one solve and write its trace")
    s.add_argument("--matrix", required=True, help="Matrix Market file")
    s.add_argument("--p", type=int, default=2)
    s.add_argument("--arith", default="exact", help="arithmetic model (default exact)")
    s.add_argument("--storage", default="exact", help="storage model (default exact)")
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--max-iters", type=int, default=100)
    s.add_argument("--escalate", default="", help="comma-separated arithmetic models to switch to on stagnation")
    s.add_argument("--reference", choices=["none", "oracle"], default="none")
    s.add_argument("--trace", help="CSV trace path (JSON sidecar goes next to it)")
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("sweep", help="run a precision sweep")
    w.add_argument("--matrix", help="Matrix Market file (otherwise generate from --n ...)")
    _add_gen_args(w, required=False)
    w.add_argument("--p", default="2", help="comma-separated p values")
    w.add_argument("--mode", default="all-arithmetic", help=f"comma-separated, from {', '.join(MODES)}")
    w.add_argument("--formats", required=True, help="comma-separated format strings")
    w.add_argument("--max-iters", type=int, default=60)
    w.add_argument("--tol", type=float, default=1e-10)
    w.add_argument("--reference", choices=["none", "oracle"], default="none")
    w.add_argument("--jobs", type=int, default=1)
    w.add_argument("--out", required=True, help="output directory")
    w.set_defaults(func=cmd_sweep)

    v = sub.add_parser("validate", help="compare the exact iterative solve against the eigen oracle")
    v.add_argument("--matrix", required=True)
    v.add_argument("--p", type=int, default=2)
    v.add_argument("--tol", type=float, default=1e-12)
    v.add_argument("--max-iters", type=int, default=200)
    v.add_argument("--gap-tol", type=float, default=1e-6)
    v.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidInputError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
