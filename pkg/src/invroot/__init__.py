"""Inverse matrix p-th roots under simulated reduced-precision arithmetic and storage."""

from .errors import DivergenceError, InvalidInputError
from .fixedpoint import FixedFormat, to_fixed
from .matgen import OverlapSpec, gen_overlap, load_matrix, save_matrix
from .matrix import EXACT, matmul, parse_model, quantize_matrix
from .oracle import jacobi_eigen, reference_inv_proot
from .softfloat import DOUBLE, HALF, SINGLE, FloatFormat, quantize
from .solver import SolverConfig, SolveTrace, init_c0, iterate_once, solve, two_phase_summary

__all__ = [
    "DivergenceError",
    "InvalidInputError",
    "FixedFormat",
    "to_fixed",
    "OverlapSpec",
    "gen_overlap",
    "load_matrix",
    "save_matrix",
    "EXACT",
    "matmul",
    "parse_model",
    "quantize_matrix",
    "jacobi_eigen",
    "reference_inv_proot",
    "DOUBLE",
    "HALF",
    "SINGLE",
    "FloatFormat",
    "quantize",
    "SolverConfig",
    "SolveTrace",
    "init_c0",
    "iterate_once",
    "solve",
    "two_phase_summary",
]
