"""Iterative inverse p-th root under simulated reduced precision.

The update is

    C_{k+1} = ((p + 1) C_k - C_k^{p+1} A) / p

started from ``C_0 = A^T / (||A||_1 ||A||_inf)``, which satisfies
``||I - C_0^p A||_2 < 1`` for SPD ``A`` and hence converges. ``p = 1`` is
Newton-Schulz for the inverse.

Two places take a number model: ``arith`` governs every scalar operation of
the update, ``storage`` is applied to ``A`` once and to each new iterate. The
residual ``||I - C_k^p A||_F`` that drives stopping is always measured in
double precision against the caller's (unquantized) ``A``.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DivergenceError, InvalidInputError
from .matrix import (
    EXACT,
    ArithmeticModel,
    as_matrix,
    is_more_precise,
    lincomb,
    matmul,
    norm_1,
    norm_inf,
    quantize_matrix,
    spectral_norm_est,
)

CONVERGED = "converged"
ITERATION_LIMIT = "iteration_limit"
DIVERGED = "diverged"
NON_FINITE = "non_finite"

TRACE_HEADER = ["iter", "residual_fro", "error_fro", "delta_fro", "arith", "storage"]


class ContractionWarning(UserWarning):
    """The (quantized) starting guess does not satisfy ||I - C0^p A||_2 < 1."""


@dataclass(frozen=True)
class SolverConfig:
    p: int = 2
    arith: ArithmeticModel = EXACT
    storage: ArithmeticModel = EXACT
    max_iters: int = 100
    residual_tol: float = 1e-10
    stagnation_window: int = 5
    stagnation_factor: float = 0.9
    # arithmetic models to switch to, in order, when progress stalls
    escalation: tuple = ()

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise InvalidInputError(f"p must be a positive integer, got {self.p}")
        if self.max_iters < 1:
            raise InvalidInputError("max_iters must be >= 1")
        if not self.residual_tol > 0:
            raise InvalidInputError("residual_tol must be positive")
        if self.stagnation_window < 1:
            raise InvalidInputError("stagnation_window must be >= 1")
        if not 0 < self.stagnation_factor < 1:
            raise InvalidInputError("stagnation_factor must be in (0, 1)")
        prev = self.arith
        for model in self.escalation:
            if not is_more_precise(model, prev):
                raise InvalidInputError(f"escalation must increase precision: {prev} -> {model}")
            prev = model

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "arith": str(self.arith),
            "storage": str(self.storage),
            "max_iters": self.max_iters,
            "residual_tol": self.residual_tol,
            "stagnation_window": self.stagnation_window,
            "stagnation_factor": self.stagnation_factor,
            "escalation": [str(m) for m in self.escalation],
        }


@dataclass
class IterationRecord:
    k: int
    residual_fro: float
    error_fro: Optional[float]
    delta_fro: Optional[float]  # None for the starting guess
    arith: str
    storage: str


@dataclass
class SolveTrace:
    config: SolverConfig
    records: list = field(default_factory=list)
    outcome: str = ITERATION_LIMIT
    C: Optional[np.ndarray] = None
    contraction: Optional[float] = None
    escalations: list = field(default_factory=list)  # iteration index at each switch

    @property
    def residuals(self) -> np.ndarray:
        return np.array([r.residual_fro for r in self.records])

    @property
    def iterations(self) -> int:
        return self.records[-1].k if self.records else 0

    def to_json(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "outcome": self.outcome,
            "iterations": self.iterations,
            "final_residual": _num(self.records[-1].residual_fro) if self.records else None,
            "contraction_c0": self.contraction,
            "escalated_at": self.escalations,
        }


def init_c0(A) -> np.ndarray:
    """Starting guess ``A^T / (||A||_1 * ||A||_inf)`` in double precision."""
    A = as_matrix(A)
    scale = norm_1(A) * norm_inf(A)
    if scale == 0.0:
        raise InvalidInputError("cannot start from the zero matrix")
    return A.T / scale


def residual_matrix(A, C, p: int) -> np.ndarray:
    """``I - C^p A`` in double precision."""
    A = as_matrix(A)
    with np.errstate(over="ignore", invalid="ignore"):
        return np.eye(A.shape[0]) - np.linalg.matrix_power(C, p) @ A


def check_contraction(A, C0, p: int) -> float:
    """Spectral-norm estimate of ``I - C0^p A``; below 1 guarantees convergence."""
    A = as_matrix(A)
    C0 = as_matrix(C0)
    if A.shape != C0.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {C0.shape}")
    R = residual_matrix(A, C0, p)
    if not np.isfinite(R).all():
        raise DivergenceError("non-finite residual")
    return spectral_norm_est(R)


def iterate_once(C, A, p: int, arith: ArithmeticModel, storage: ArithmeticModel) -> np.ndarray:
    """One update step, every scalar op under ``arith``, result stored under ``storage``.

    ``C^{p+1}`` is built left to right (``C*C``, then ``*C``, ...), then
    multiplied by ``A``; the final combination uses the scalars ``(p+1)/p``
    and ``-1/p`` quantized under ``arith``.
    """
    P = C
    for _ in range(p):
        P = matmul(P, C, arith)
    P = matmul(P, A, arith)
    nxt = lincomb((p + 1) / p, C, -1.0 / p, P, arith)
    return quantize_matrix(nxt, storage)


def _fro(M) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.sqrt(np.sum(np.square(M))))


def solve(A, cfg: SolverConfig, reference=None) -> SolveTrace:
    """Run the iteration and record one :class:`IterationRecord` per step.

    Stops on ``residual <= residual_tol`` (converged), ``max_iters``
    (iteration_limit), a non-finite iterate (non_finite), or when the residual
    exceeds both 1 and ten times its running minimum (diverged). Convergence
    is only tested from the first update on, so the trace always has at least
    two records.

    With a non-empty ``cfg.escalation`` a stall switches the arithmetic model
    to the next entry and continues from the current iterate. A stall is a
    ``delta_fro`` that did not shrink by ``stagnation_factor`` over the last
    ``stagnation_window`` steps, looked at only once ``delta_fro`` is past its
    peak (it grows while the iterate is still scaling up from ``C_0``).
    """
    A_true = as_matrix(A)
    if not np.isfinite(A_true).all():
        raise InvalidInputError("A has non-finite entries")
    if reference is not None:
        reference = as_matrix(reference)
        if reference.shape != A_true.shape:
            raise InvalidInputError("reference has the wrong shape")

    p = cfg.p
    storage = cfg.storage
    arith = cfg.arith
    schedule = list(cfg.escalation)
    trace = SolveTrace(config=cfg)

    A_s = quantize_matrix(A_true, storage)
    if not np.array_equal(A_s, A_s.T):
        raise InvalidInputError("A must be symmetric (after storage quantization)")
    C = quantize_matrix(init_c0(A_s), storage)

    try:
        trace.contraction = check_contraction(A_s, C, p)
    except DivergenceError:
        trace.contraction = math.inf
    if not trace.contraction < 1.0:
        warnings.warn(
            f"starting guess violates the contraction bound: ||I - C0^p A||_2 ~ {trace.contraction:.6g}",
            ContractionWarning,
            stacklevel=2,
        )

    def record(k, C, delta):
        res = _fro(residual_matrix(A_true, C, p))
        err = _fro(C - reference) if reference is not None else None
        rec = IterationRecord(k, res, err, delta, str(arith), str(storage))
        trace.records.append(rec)
        return rec

    rec = record(0, C, None)
    best = rec.residual_fro
    deltas: list[float] = []  # since last switch
    for k in range(1, cfg.max_iters + 1):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                C_new = iterate_once(C, A_s, p, arith, storage)
        except DivergenceError:
            trace.outcome = NON_FINITE
            break
        delta = _fro(C_new - C)
        C = C_new
        rec = record(k, C, delta)
        if not (np.isfinite(C).all() and math.isfinite(rec.residual_fro)):
            trace.outcome = NON_FINITE
            break
        if rec.residual_fro <= cfg.residual_tol:
            trace.outcome = CONVERGED
            break
        if rec.residual_fro > 1.0 and rec.residual_fro > 10.0 * best:
            trace.outcome = DIVERGED
            break
        best = min(best, rec.residual_fro)
        if k == cfg.max_iters:
            trace.outcome = ITERATION_LIMIT
            break

        deltas.append(delta)
        if schedule and _stalled(deltas, cfg.stagnation_window, cfg.stagnation_factor):
            arith = schedule.pop(0)
            trace.escalations.append(k)
            deltas = []
    trace.C = C
    return trace


def _stalled(deltas: Sequence[float], window: int, factor: float) -> bool:
    peak = int(np.argmax(deltas))
    k = len(deltas) - 1
    if k - window <= peak:
        return False
    return deltas[k] > factor * deltas[k - window]


def two_phase_summary(trace: SolveTrace) -> tuple[int, float]:
    """``(phase1_end, plateau_level)`` of a trace.

    ``plateau_level`` is the smallest residual seen; ``phase1_end`` is the first
    iteration whose residual is within a factor 2 of it.
    """
    if len(trace.records) < 3:
        raise ValueError("two_phase_summary needs at least 3 records")
    return phase_summary(trace)


def phase_summary(trace: SolveTrace) -> tuple[int, float]:
    """:func:`two_phase_summary` without the minimum-length check."""
    res = trace.residuals
    plateau = float(np.min(res))
    idx = int(np.argmax(res <= 2.0 * plateau))
    return trace.records[idx].k, plateau


# ---- serialization ---------------------------------------------------------


def _num(x) -> Optional[float]:
    if x is None:
        return None
    return x if math.isfinite(x) else repr(x)


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else repr(float(x))


def write_trace_csv(trace: SolveTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for r in trace.records:
            w.writerow([r.k, _fmt(r.residual_fro), _fmt(r.error_fro), _fmt(r.delta_fro), r.arith, r.storage])


def read_trace_csv(path) -> list:
    def opt(s):
        return float(s) if s != "" else None

    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != TRACE_HEADER:
        raise ValueError(f"{path}: bad trace header")
    return [
        IterationRecord(int(r[0]), float(r[1]), opt(r[2]), opt(r[3]), r[4], r[5])
        for r in rows[1:]
    ]


def write_trace_json(trace: SolveTrace, path) -> None:
    with open(path, "w") as fh:
        json.dump(trace.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
