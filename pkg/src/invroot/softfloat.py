"""Custom-precision binary floating point, simulated on top of float64.

Every value is held as an ordinary double; a :class:`FloatFormat` rounds it
onto the grid of a narrower (exponent, mantissa) format with
round-to-nearest-even. Arithmetic is "compute in double, round once", which
is exact single-op semantics whenever the format is narrower than double.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

_FLOAT_RE = re.compile(r"^float:(?:e(\d+))?m(\d+)$")


@dataclass(frozen=True)
class FloatFormat:
    """Binary floating-point format with ``exponent_bits`` and ``mantissa_bits``.

    ``mantissa_bits`` counts stored fraction bits (the implicit leading one is
    not included), so IEEE half is ``FloatFormat(5, 10)``.
    """

    exponent_bits: int = 11
    mantissa_bits: int = 52
    subnormals: bool = True

    def __post_init__(self):
        if not 1 <= self.exponent_bits <= 11:
            raise ValueError(f"exponent_bits must be in 1..11, got {self.exponent_bits}")
        if not 0 <= self.mantissa_bits <= 52:
            raise ValueError(f"mantissa_bits must be in 0..52, got {self.mantissa_bits}")

    @property
    def bias(self) -> int:
        return (1 << (self.exponent_bits - 1)) - 1

    @property
    def emin(self) -> int:
        return 1 - self.bias

    @property
    def emax(self) -> int:
        return self.bias

    @property
    def max_finite(self) -> float:
        return float(np.ldexp(2.0 - 2.0 ** -self.mantissa_bits, self.emax))

    @property
    def min_normal(self) -> float:
        return float(np.ldexp(1.0, self.emin))

    @property
    def min_subnormal(self) -> float:
        return float(np.ldexp(1.0, self.emin - self.mantissa_bits))

    @property
    def name(self) -> str:
        return f"float:e{self.exponent_bits}m{self.mantissa_bits}"

    def __str__(self) -> str:
        return self.name

    def quantize(self, x):
        return quantize(x, self)

    def add(self, a, b):
        return float_add(a, b, self)

    def sub(self, a, b):
        return float_sub(a, b, self)

    def mul(self, a, b):
        return float_mul(a, b, self)


HALF = FloatFormat(5, 10)
SINGLE = FloatFormat(8, 23)
DOUBLE = FloatFormat(11, 52)

PRESETS = {"half": HALF, "single": SINGLE, "double": DOUBLE}


def parse_float_format(text: str) -> FloatFormat:
    """Parse ``half``/``single``/``double`` or ``float:e<E>m<M>``.

    ``float:m<M>`` keeps the full 11-bit exponent.
    """
    text = text.strip()
    if text in PRESETS:
        return PRESETS[text]
    m = _FLOAT_RE.match(text)
    if m is None:
        raise ValueError(f"not a float format: {text!r}")
    return FloatFormat(int(m.group(1) or 11), int(m.group(2)))


def quantize(x, fmt: FloatFormat):
    """Round ``x`` to the nearest value representable in ``fmt`` (ties to even).

    Accepts a scalar or an array. Overflow gives signed infinity, values below
    half the smallest subnormal give signed zero, NaN stays NaN. With
    ``fmt.subnormals`` off, results below the smallest normal flush to signed
    zero.
    """
    arr = np.asarray(x, dtype=np.float64)
    scalar = arr.ndim == 0
    if fmt.exponent_bits == 11 and fmt.mantissa_bits == 52 and fmt.subnormals:
        out = arr.copy()
    else:
        out = _quantize_array(np.atleast_1d(arr), fmt).reshape(arr.shape)
    return float(out) if scalar else out


def _quantize_array(arr: np.ndarray, fmt: FloatFormat) -> np.ndarray:
    drop = 52 - fmt.mantissa_bits
    if drop:
        # round-to-nearest-even on the raw binary64 pattern; a mantissa carry
        # correctly bumps the exponent
        u = arr.view(np.uint64)
        lsb = (u >> np.uint64(drop)) & np.uint64(1)
        u = (u + np.uint64((1 << (drop - 1)) - 1) + lsb) & np.uint64((2**64 - 1) ^ ((1 << drop) - 1))
        q = u.view(np.float64)
    else:
        q = arr.copy()
    mag = np.abs(q)
    over = mag > fmt.max_finite
    if over.any():
        q = np.where(over, np.copysign(np.inf, arr), q)
    tiny = np.abs(arr) < fmt.min_normal
    if tiny.any():
        if fmt.subnormals:
            step = fmt.emin - fmt.mantissa_bits
            sub = np.ldexp(np.rint(np.ldexp(arr[tiny], -step)), step)
        else:
            sub = np.copysign(np.where(mag[tiny] < fmt.min_normal, 0.0, q[tiny]), arr[tiny])
        q[tiny] = sub
    nan = np.isnan(arr)
    if nan.any():
        q[nan] = np.nan
    return q


def float_add(a, b, fmt: FloatFormat):
    with np.errstate(over="ignore", invalid="ignore"):
        r = np.add(a, b)
    return quantize(r, fmt)


def float_sub(a, b, fmt: FloatFormat):
    with np.errstate(over="ignore", invalid="ignore"):
        r = np.subtract(a, b)
    return quantize(r, fmt)


def float_mul(a, b, fmt: FloatFormat):
    with np.errstate(over="ignore", invalid="ignore"):
        r = np.multiply(a, b)
    return quantize(r, fmt)
