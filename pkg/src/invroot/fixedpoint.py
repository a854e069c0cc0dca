"""Saturating two's-complement fixed point, simulated on float64.

A value is stored as the double ``n * 2**-frac_bits`` for an integer ``n``.
With at most 53 significant bits every grid point is an exact double, so the
simulation never loses information the real datapath would keep.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError

_FIXED_RE = re.compile(r"^fixed:i(\d+)f(\d+)$")


class FixedPointError(DivergenceError):
    """A non-finite value reached a fixed-point quantizer."""


@dataclass(frozen=True)
class FixedFormat:
    """Fixed-point format with ``int_bits`` (sign excluded) and ``frac_bits``.

    Range is ``[-2**int_bits, 2**int_bits - 2**-frac_bits]`` in steps of
    ``2**-frac_bits``. Overflow saturates.
    """

    int_bits: int = 13
    frac_bits: int = 18

    def __post_init__(self):
        if not 0 <= self.int_bits <= 32:
            raise ValueError(f"int_bits must be in 0..32, got {self.int_bits}")
        if not 0 <= self.frac_bits <= 52:
            raise ValueError(f"frac_bits must be in 0..52, got {self.frac_bits}")
        if self.int_bits + self.frac_bits < 1:
            raise ValueError("fixed format needs at least one magnitude bit")
        if self.int_bits + self.frac_bits + 1 > 53:
            raise ValueError("total width (with sign) must not exceed 53 bits")

    @property
    def step(self) -> float:
        return 2.0 ** -self.frac_bits

    @property
    def lo(self) -> float:
        return -(2.0 ** self.int_bits)

    @property
    def hi(self) -> float:
        return 2.0 ** self.int_bits - self.step

    @property
    def name(self) -> str:
        return f"fixed:i{self.int_bits}f{self.frac_bits}"

    def __str__(self) -> str:
        return self.name

    def quantize(self, x):
        return to_fixed(x, self)

    def add(self, a, b):
        return fixed_add(a, b, self)

    def sub(self, a, b):
        return fixed_sub(a, b, self)

    def mul(self, a, b):
        return fixed_mul(a, b, self)


def parse_fixed_format(text: str) -> FixedFormat:
    m = _FIXED_RE.match(text.strip())
    if m is None:
        raise ValueError(f"not a fixed format: {text!r}")
    return FixedFormat(int(m.group(1)), int(m.group(2)))


def to_fixed(x, fmt: FixedFormat):
    """Round to the ``2**-frac_bits`` grid (ties to even) and saturate.

    Raises:
        FixedPointError: if any input is NaN or infinite.
    """
    arr = np.asarray(x, dtype=np.float64)
    if not np.isfinite(arr).all():
        raise FixedPointError(f"non-finite value cannot be stored as {fmt.name}")
    q = np.ldexp(np.rint(np.ldexp(arr, fmt.frac_bits)), -fmt.frac_bits)
    q = np.clip(q, fmt.lo, fmt.hi)
    return float(q) if q.ndim == 0 else q


def fixed_add(a, b, fmt: FixedFormat):
    return to_fixed(np.add(a, b), fmt)


def fixed_sub(a, b, fmt: FixedFormat):
    return to_fixed(np.subtract(a, b), fmt)


def fixed_mul(a, b, fmt: FixedFormat):
    """Product of ``a`` and ``b`` rounded once to the grid.

    For wide formats the double product may itself be rounded onto a grid
    midpoint; the exact error term of the product breaks such ties.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise FixedPointError(f"non-finite value cannot be stored as {fmt.name}")
    prod, err = _two_product(a, b)
    s = np.ldexp(prod, fmt.frac_bits)
    q = np.rint(s)
    d = s - q
    fix = (np.abs(d) == 0.5) & (np.sign(err) == np.sign(d))
    q = np.where(fix, q + np.sign(d), q)
    q = np.clip(np.ldexp(q, -fmt.frac_bits), fmt.lo, fmt.hi)
    return float(q) if q.ndim == 0 else q


def _two_product(a, b):
    """``a*b = prod + err`` exactly (Dekker), barring overflow and underflow."""
    with np.errstate(over="ignore", invalid="ignore"):
        prod = a * b
        ah, al = _split(a)
        bh, bl = _split(b)
        err = ((ah * bh - prod) + ah * bl + al * bh) + al * bl
    return prod, np.where(np.isfinite(err), err, 0.0)


def _split(x):
    c = 134217729.0 * x  # 2**27 + 1
    hi = c - (c - x)
    return hi, x - hi
