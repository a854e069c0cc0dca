import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from invroot.errors import DivergenceError
from invroot.fixedpoint import (
    FixedFormat,
    FixedPointError,
    fixed_add,
    fixed_mul,
    fixed_sub,
    parse_fixed_format,
    to_fixed,
)
from oracles import fixed_grid_nearest

formats = st.builds(FixedFormat, st.integers(0, 13), st.integers(1, 26))
finite = st.floats(-1e6, 1e6, allow_nan=False)


def grid_values(fmt):
    return st.integers(-(2 ** (fmt.int_bits + fmt.frac_bits)), 2 ** (fmt.int_bits + fmt.frac_bits) - 1).map(
        lambda n: n * fmt.step
    )


def exact_product(a, b, fmt):
    return fixed_grid_nearest_fraction(Fraction(a) * Fraction(b), fmt)


def fixed_grid_nearest_fraction(v, fmt):
    k = v * 2**fmt.frac_bits
    fl = k.numerator // k.denominator
    r = k - fl
    n = fl + 1 if (r > Fraction(1, 2) or (r == Fraction(1, 2) and fl % 2)) else fl
    return float(min(max(Fraction(n, 2**fmt.frac_bits), Fraction(fmt.lo)), Fraction(fmt.hi)))


def test_defaults_and_range():
    f = FixedFormat()
    assert (f.int_bits, f.frac_bits) == (13, 18)
    assert f.lo == -8192.0
    assert f.hi == 8192.0 - 2.0**-18
    assert f.name == "fixed:i13f18"


@pytest.mark.parametrize("bad", [(-1, 4), (33, 4), (4, 53), (0, 0), (20, 33)])
def test_bad_formats(bad):
    with pytest.raises(ValueError):
        FixedFormat(*bad)


def test_parse():
    assert parse_fixed_format("fixed:i3f12") == FixedFormat(3, 12)
    with pytest.raises(ValueError):
        parse_fixed_format("fixed:3.12")


def test_documented_examples():
    f = FixedFormat(3, 4)
    assert to_fixed(0.0, f) == 0.0
    assert to_fixed(0.1, f) == 0.125
    assert to_fixed(100.0, f) == 7.9375
    assert fixed_add(0.25, 0.5, f) == 0.75
    assert fixed_mul(0.0625, 0.0625, f) == 0.0
    assert fixed_mul(7.0, 7.0, f) == 7.9375


def test_grid_enumeration_for_0_1():
    f = FixedFormat(3, 4)
    grid = [n / 16 for n in range(-128, 128)]
    assert to_fixed(0.1, f) == min(grid, key=lambda g: abs(g - 0.1))


def test_examples():
    f = FixedFormat(3, 2)
    assert to_fixed(0.3, f) == 0.25
    assert to_fixed(0.375, f) == 0.5  # tie, 1 vs 2 quarters: even is 2
    assert to_fixed(0.125, f) == 0.0  # tie between 0 and 1 quarter
    assert to_fixed(100.0, f) == 7.75
    assert to_fixed(-100.0, f) == -8.0
    assert fixed_add(7.5, 0.5, f) == 7.75
    assert fixed_mul(0.25, 0.25, f) == 0.0
    assert fixed_mul(0.75, 0.5, f) == 0.5
    assert fixed_sub(-8.0, 1.0, f) == -8.0


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_non_finite_raises(bad):
    with pytest.raises(FixedPointError):
        to_fixed(bad, FixedFormat())
    with pytest.raises(DivergenceError):
        fixed_mul(bad, 1.0, FixedFormat())


def test_array_non_finite_raises():
    with pytest.raises(FixedPointError):
        to_fixed(np.array([1.0, np.nan]), FixedFormat())


@given(finite, formats)
def test_matches_fraction_oracle(x, fmt):
    assert to_fixed(x, fmt) == fixed_grid_nearest(x, fmt.int_bits, fmt.frac_bits)


@given(st.data(), formats)
def test_mul_rounds_exact_product_once(data, fmt):
    a = data.draw(grid_values(fmt))
    b = data.draw(grid_values(fmt))
    assert fixed_mul(a, b, fmt) == exact_product(a, b, fmt)


@given(st.data())
def test_mul_wide_format_ties(data):
    # i + 2f > 53 here, so the double product alone can land on a midpoint
    fmt = FixedFormat(1, 26)
    a = data.draw(grid_values(fmt))
    b = data.draw(grid_values(fmt))
    assert fixed_mul(a, b, fmt) == exact_product(a, b, fmt)


@given(st.data(), formats)
def test_add_exact_then_saturate(data, fmt):
    a = data.draw(grid_values(fmt))
    b = data.draw(grid_values(fmt))
    assert fixed_add(a, b, fmt) == min(max(a + b, fmt.lo), fmt.hi)
    assert fixed_sub(a, b, fmt) == min(max(a - b, fmt.lo), fmt.hi)


@given(finite, formats)
def test_idempotent_and_in_range(x, fmt):
    q = to_fixed(x, fmt)
    assert to_fixed(q, fmt) == q
    assert fmt.lo <= q <= fmt.hi
    assert (q / fmt.step) == int(q / fmt.step)


@given(finite, formats)
def test_error_bound_inside_range(x, fmt):
    if fmt.lo <= x <= fmt.hi:
        assert abs(to_fixed(x, fmt) - x) <= fmt.step / 2


@given(finite, finite, formats)
def test_monotone(x, y, fmt):
    if x > y:
        x, y = y, x
    assert to_fixed(x, fmt) <= to_fixed(y, fmt)
