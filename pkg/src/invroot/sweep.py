"""Precision sweeps: one solve per (p, mode, format) cell, CSV traces plus a summary.

Cells are independent and deterministic, so running them in a process pool
gives byte-identical output to running them serially.
"""

from __future__ import annotations

import csv
import os
import re
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .matgen import OverlapSpec, gen_overlap, load_matrix
from .matrix import EXACT, parse_model
from .oracle import reference_inv_proot
from .solver import (
    ContractionWarning,
    SolverConfig,
    SolveTrace,
    phase_summary,
    solve,
    write_trace_csv,
    write_trace_json,
)

ALL_ARITHMETIC = "all-arithmetic"
STORAGE_ONLY = "storage-only"
MODES = (ALL_ARITHMETIC, STORAGE_ONLY)

SUMMARY_HEADER = ["p", "mode", "format", "outcome", "plateau", "phase1_end", "iters"]


@dataclass
class SweepSpec:
    matrix: Union[OverlapSpec, str]
    p_values: list
    modes: list
    formats: list
    max_iters: int = 60
    residual_tol: float = 1e-10
    out_dir: str = "sweep_out"
    reference: bool = False

    def __post_init__(self):
        if not self.p_values or not self.modes or not self.formats:
            raise ValueError("sweep grid must be non-empty (p values, modes and formats)")
        for m in self.modes:
            if m not in MODES:
                raise ValueError(f"unknown mode {m!r}; expected one of {MODES}")
        for f in self.formats:
            parse_model(f)
        for p in self.p_values:
            if int(p) != p or p < 1:
                raise ValueError(f"bad p {p!r}")

    def load(self) -> np.ndarray:
        if isinstance(self.matrix, OverlapSpec):
            return gen_overlap(self.matrix)
        return load_matrix(self.matrix)


@dataclass
class CellResult:
    p: int
    mode: str
    fmt: str
    outcome: str
    plateau: float
    phase1_end: int
    iters: int
    trace: Optional[SolveTrace] = field(default=None, repr=False)

    def row(self) -> list:
        return [self.p, self.mode, self.fmt, self.outcome, repr(self.plateau), self.phase1_end, self.iters]


def cell_config(p: int, mode: str, fmt: str, max_iters: int, tol: float) -> SolverConfig:
    model = parse_model(fmt)
    if mode == ALL_ARITHMETIC:
        return SolverConfig(p=p, arith=model, storage=EXACT, max_iters=max_iters, residual_tol=tol)
    return SolverConfig(p=p, arith=EXACT, storage=model, max_iters=max_iters, residual_tol=tol)


def run_cell(A, p: int, mode: str, fmt: str, max_iters: int, tol: float, reference=None) -> CellResult:
    cfg = cell_config(p, mode, fmt, max_iters, tol)
    with warnings.catch_warnings():
        # quantized starting guesses at very low precision may break the bound;
        # the trace shows the consequence
        warnings.simplefilter("ignore", ContractionWarning)
        trace = solve(A, cfg, reference=reference)
    phase1_end, plateau = phase_summary(trace)
    return CellResult(p, mode, fmt, trace.outcome, plateau, phase1_end, trace.iterations, trace)


def _slug(fmt: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "-", fmt).strip("-")


def trace_basename(p: int, mode: str, fmt: str) -> str:
    return f"trace_p{p}_{mode}_{_slug(fmt)}"


def _cell_job(args):
    A, p, mode, fmt, max_iters, tol, reference = args
    return run_cell(A, p, mode, fmt, max_iters, tol, reference)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[CellResult]:
    """Run every cell, write traces and ``summary.csv`` under ``spec.out_dir``."""
    A = spec.load()
    refs = {p: reference_inv_proot(A, p) for p in spec.p_values} if spec.reference else {}
    cells = [(p, mode, fmt) for p in spec.p_values for mode in spec.modes for fmt in spec.formats]
    work = [(A, p, mode, fmt, spec.max_iters, spec.residual_tol, refs.get(p)) for p, mode, fmt in cells]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_cell_job, work))
    else:
        results = [_cell_job(w) for w in work]

    os.makedirs(spec.out_dir, exist_ok=True)
    for r in results:
        base = os.path.join(spec.out_dir, trace_basename(r.p, r.mode, r.fmt))
        write_trace_csv(r.trace, base + ".csv")
        write_trace_json(r.trace, base + ".json")
    write_summary(results, os.path.join(spec.out_dir, "summary.csv"))
    return results


def write_summary(results, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        for r in results:
            w.writerow(r.row())


def read_summary(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        row["p"] = int(row["p"])
        row["plateau"] = float(row["plateau"])
        row["phase1_end"] = int(row["phase1_end"])
        row["iters"] = int(row["iters"])
    return rows
