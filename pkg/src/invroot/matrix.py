"""Dense matrix kernels with every scalar operation routed through a number model.

Matrices are plain square ``float64`` numpy arrays. A number model is one of
:data:`EXACT`, a :class:`~invroot.softfloat.FloatFormat` or a
:class:`~invroot.fixedpoint.FixedFormat`; all three expose ``quantize``,
``add`` and ``mul`` on arrays, so the kernels below are written once.

Norms and the spectral-norm estimate always run in plain double precision:
they are instrumentation, not part of the simulated datapath.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DivergenceError
from .fixedpoint import FixedFormat, parse_fixed_format
from .rng import SplitMix64
from .softfloat import FloatFormat, parse_float_format


@dataclass(frozen=True)
class Exact:
    """Reference double precision, no quantization."""

    name = "exact"

    def __str__(self) -> str:
        return self.name

    def quantize(self, x):
        arr = np.array(x, dtype=np.float64)
        return float(arr) if arr.ndim == 0 else arr

    def add(self, a, b):
        return np.add(a, b)

    def sub(self, a, b):
        return np.subtract(a, b)

    def mul(self, a, b):
        return np.multiply(a, b)


EXACT = Exact()

ArithmeticModel = Union[Exact, FloatFormat, FixedFormat]


def parse_model(text: str) -> ArithmeticModel:
    """Parse ``exact``, ``half``, ``single``, ``double``, ``float:e<E>m<M>``, ``fixed:i<I>f<F>``."""
    text = text.strip()
    if text == "exact":
        return EXACT
    if text.startswith("fixed:"):
        return parse_fixed_format(text)
    return parse_float_format(text)


def is_more_precise(a: ArithmeticModel, b: ArithmeticModel) -> bool:
    """True if ``a`` is strictly more precise than ``b``."""
    if isinstance(a, Exact):
        return not isinstance(b, Exact)
    if type(a) is not type(b):
        return False
    if isinstance(a, FloatFormat):
        return (
            a.mantissa_bits >= b.mantissa_bits
            and a.exponent_bits >= b.exponent_bits
            and (a.mantissa_bits, a.exponent_bits) != (b.mantissa_bits, b.exponent_bits)
        )
    return (
        a.frac_bits >= b.frac_bits
        and a.int_bits >= b.int_bits
        and (a.frac_bits, a.int_bits) != (b.frac_bits, b.int_bits)
    )


def as_matrix(M) -> np.ndarray:
    arr = np.asarray(M, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def quantize_matrix(M, model: ArithmeticModel) -> np.ndarray:
    """Elementwise quantization. Under :data:`EXACT` the values are returned unchanged."""
    return np.asarray(model.quantize(as_matrix(M)), dtype=np.float64)


def matmul(A, B, model: ArithmeticModel) -> np.ndarray:
    """Matrix product with per-scalar-op quantization.

    ``C[i, j]`` is the left fold ``acc = add(acc, mul(A[i, k], B[k, j]))`` over
    ascending ``k`` starting from ``acc = 0``, with each product and each partial
    sum quantized. The fold is vectorised over ``(i, j)``, which does not change
    the order of operations on any single element.
    """
    A = quantize_matrix(A, model)
    B = quantize_matrix(B, model)
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    n = A.shape[0]
    acc = np.zeros((n, n))
    if isinstance(model, Exact):
        for k in range(n):
            acc += np.multiply.outer(A[:, k], B[k, :])
        return acc
    for k in range(n):
        acc = model.add(acc, model.mul(A[:, k, None], B[None, k, :]))
    return acc


def lincomb(alpha: float, X, beta: float, Y, model: ArithmeticModel) -> np.ndarray:
    """``alpha*X + beta*Y`` elementwise, scalars and operands quantized first."""
    X = quantize_matrix(X, model)
    Y = quantize_matrix(Y, model)
    a = model.quantize(alpha)
    b = model.quantize(beta)
    return model.add(model.mul(a, X), model.mul(b, Y))


def axpby_identity(alpha: float, M, beta: float, model: ArithmeticModel) -> np.ndarray:
    """``alpha*M + beta*I`` elementwise under ``model``."""
    M = as_matrix(M)
    return lincomb(alpha, M, beta, np.eye(M.shape[0]), model)


def _finite(M) -> np.ndarray:
    M = as_matrix(M)
    if not np.isfinite(M).all():
        raise DivergenceError("matrix has non-finite entries")
    return M


def norm_1(M) -> float:
    """Maximum absolute column sum."""
    return float(np.abs(_finite(M)).sum(axis=0).max())


def norm_inf(M) -> float:
    """Maximum absolute row sum."""
    return float(np.abs(_finite(M)).sum(axis=1).max())


def norm_frobenius(M) -> float:
    M = _finite(M)
    return float(np.sqrt(np.sum(M * M)))


def spectral_norm_est(M, iters: int = 1000, tol: float = 1e-12) -> float:
    """Largest singular value of ``M`` by power iteration on ``M.T @ M``.

    Stops when the Rayleigh quotient changes by less than ``tol`` relative, or
    after ``iters`` steps. The start vector is a fixed pseudo-random vector, so
    the estimate is deterministic. Returns 0 for the zero matrix.
    """
    M = _finite(M)
    n = M.shape[0]
    x = SplitMix64(0x5EED).uniform(n) + 0.5
    lam = 0.0
    for _ in range(iters):
        nrm = np.linalg.norm(x)
        if nrm == 0.0:
            return 0.0
        v = x / nrm
        x = M.T @ (M @ v)
        new = float(v @ x)
        if new == 0.0:
            return 0.0
        done = abs(new - lam) <= tol * new
        lam = new
        if done:
            break
    return float(np.sqrt(lam))
