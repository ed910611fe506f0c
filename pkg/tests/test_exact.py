from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from dimlab.exact import (as_fraction, format_fraction, iroot, pow_bounds, pow_compare,
                          sum_pow_bounds, sum_pow_less)

pos_q = st.fractions(min_value=F(1, 10 ** 6), max_value=F(10 ** 3), max_denominator=10 ** 6)
expo = st.fractions(min_value=F(1, 20), max_value=F(3), max_denominator=20)


def test_parse_and_format_round_trip():
    assert as_fraction("3/7") == F(3, 7)
    assert as_fraction(0.5) == F(1, 2)
    assert format_fraction(F(6, 3)) == "2"
    assert format_fraction(F(-1, 3)) == "-1/3"
    with pytest.raises(ValueError):
        as_fraction(float("nan"))


@given(st.integers(min_value=0, max_value=10 ** 40), st.integers(min_value=1, max_value=9))
def test_iroot_is_floor_root(n, k):
    r = iroot(n, k)
    assert r ** k <= n < (r + 1) ** k


@given(pos_q, expo)
def test_pow_bounds_enclose(x, e):
    lo, hi = pow_bounds(x, e)
    assert lo <= hi and hi - lo <= F(1, 2 ** 64)
    a, b = e.numerator, e.denominator
    assert lo ** b <= x ** a <= hi ** b


def test_pow_bounds_exact_when_rational():
    assert pow_bounds(F(1, 4), F(1, 2)) == (F(1, 2), F(1, 2))
    assert pow_bounds(F(8, 27), F(2, 3)) == (F(4, 9), F(4, 9))


@given(pos_q, expo, pos_q)
def test_pow_compare_agrees_with_enclosure(x, e, y):
    s = pow_compare(x, e, y)
    lo, hi = pow_bounds(x, e)
    if s < 0:
        assert lo < y
    elif s > 0:
        assert hi > y
    else:
        assert lo == hi == y


def test_sum_pow_less_decides_close_cases():
    # 2 * (1/4)^(1/2) = 1 exactly
    ok, lo, hi = sum_pow_less([(2, F(1, 4))], F(1, 2), 1)
    assert not ok and lo == hi == 1
    ok, lo, hi = sum_pow_less([(1, F(2))], F(1, 2), F(14143, 10000))
    assert ok and hi < F(14143, 10000)
    lo, hi = sum_pow_bounds([(1, F(1, 2)), (1, F(1, 2))], F(1, 2))
    assert F(14142, 10000) < lo <= hi < F(14143, 10000)
