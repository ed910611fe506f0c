import math
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, strategies as st

from dimlab.capacity import (EXACT_DPS, GridSubset, IntervalCover, ParameterError, ResolutionError,
                             box_count, brute_force_cover_cost, cantor_cells, cover_cost,
                             estimate_dimension, optimal_cover, parse_scales)


@pytest.fixture(autouse=True)
def _exact_precision():
    # sums and differences of exact-mode costs must run at the same precision
    with mpmath.workdps(EXACT_DPS):
        yield


def test_cover_cost_examples():
    assert cover_cost(IntervalCover((), F(1, 2))) == 0
    assert cover_cost(IntervalCover(((F(0), F(1, 4)), (F(1, 2), F(3, 4))), F(1, 2))) == 1


def test_optimal_cover_examples():
    cost, cover = optimal_cover(GridSubset(F(1, 10), ()), 0.5)
    assert cost == 0 and cover.intervals == ()
    cost, cover = optimal_cover(GridSubset(F(1, 10), (3,)), 0.5)
    assert cost == pytest.approx(0.1 ** 0.5) and len(cover.intervals) == 1
    # cells [0, 0.1] and [0.2, 0.3]: one interval of length 0.3 beats two of 0.1
    cells = GridSubset(F(1, 10), (0, 2))
    cost, cover = optimal_cover(cells, F(1, 2), exact=True)
    assert cover.intervals == ((F(0), F(3, 10)),)
    assert abs(cost - mpmath.sqrt(mpmath.mpf(3) / 10)) < mpmath.mpf(10) ** -55
    assert cost < 2 * mpmath.sqrt(mpmath.mpf(1) / 10)
    assert cover.covers(cells.runs())


def test_exponent_range_enforced():
    with pytest.raises(ParameterError):
        optimal_cover(GridSubset(F(1, 4), (0,)), 0)
    with pytest.raises(ParameterError):
        optimal_cover(GridSubset(F(1, 4), (0,)), 1.5)


def test_box_count_examples():
    assert box_count(GridSubset.full(64), F(1, 64)) == 64
    assert box_count(GridSubset.full(30), F(1, 7)) == 7
    for scale in (F(1, 64), F(1, 10), F(1, 3)):
        assert box_count(GridSubset(F(1, 64), (17,)), scale) in (1, 2)
    with pytest.raises(ResolutionError):
        box_count(GridSubset.full(8), F(1, 16))


def test_cantor_box_counts_are_powers_of_two():
    cells = cantor_cells(10)
    for j in range(11):
        assert box_count(cells, F(1, 3 ** j)) == 2 ** j


def test_dimension_calibration():
    est = estimate_dimension(cantor_cells(10), [F(1, 3 ** j) for j in range(1, 11)])
    assert abs(est.slope - math.log(2) / math.log(3)) < 0.05
    assert abs(estimate_dimension(GridSubset.full(1024), parse_scales("2^-1..2^-10")).slope - 1) < 0.02
    assert abs(estimate_dimension(GridSubset(F(1, 1024), (500,)), parse_scales("2^-1..2^-10")).slope) < 0.02
    with pytest.raises(ParameterError):
        estimate_dimension(GridSubset.full(8), [F(1, 2), F(1, 4)])
    assert "upper bound" in est.estimator


def test_parse_scales():
    assert parse_scales("2^-1..2^-3") == [F(1, 2), F(1, 4), F(1, 8)]
    assert parse_scales("1/3, 1/9,3^-3") == [F(1, 3), F(1, 9), F(1, 27)]
    with pytest.raises(ParameterError):
        parse_scales("2^-1..3^-3")


def test_json_round_trip():
    cells = GridSubset(F(1, 12), (0, 3, 4, 11))
    assert GridSubset.from_json(cells.to_json()) == cells
    cover = IntervalCover(((F(0), F(1, 3)),), F(2, 3))
    assert IntervalCover.from_json(cover.to_json()) == cover
    est = estimate_dimension(cantor_cells(4), [F(1, 3 ** j) for j in range(1, 5)])
    assert type(est).from_json(est.to_json()) == est


cell_sets = st.lists(st.integers(min_value=0, max_value=11), max_size=12, unique=True).map(
    lambda cs: GridSubset(F(1, 12), tuple(sorted(cs))))
exponents = st.sampled_from([F(1, 5), F(3, 10), F(1, 2), F(2, 3), F(7, 10), F(1)])


@given(cell_sets, exponents)
def test_dp_equals_brute_force(cells, d):
    cost, cover = optimal_cover(cells, d, exact=True)
    assert cost == brute_force_cover_cost(cells, d, exact=True)
    assert cover.covers(cells.runs())


@given(cell_sets, cell_sets, exponents)
def test_monotone_and_subadditive(a, b, d):
    union = a | b
    ca, cb, cu = (optimal_cover(s, d, exact=True)[0] for s in (a, b, union))
    inter = GridSubset(a.resolution, tuple(sorted(set(a.cells) & set(b.cells))))
    assert optimal_cover(inter, d, exact=True)[0] <= ca
    assert ca <= cu and cb <= cu
    assert cu <= ca + cb


@given(cell_sets)
def test_unit_exponent_gives_measure(cells):
    cost, _ = optimal_cover(cells, 1, exact=True)
    assert abs(cost - mpmath.mpf(cells.measure().numerator) / cells.measure().denominator) < mpmath.mpf(10) ** -55


@given(cell_sets, exponents, exponents)
def test_cost_non_increasing_in_exponent(cells, d1, d2):
    lo, hi = sorted((d1, d2))
    assert optimal_cover(cells, hi, exact=True)[0] <= optimal_cover(cells, lo, exact=True)[0]
