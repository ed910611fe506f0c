from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dimlab.construction import StaircasePlan, build_staircase
from dimlab.functions import (Ball, DomainError, GridError, Piece, PiecewiseFunction,
                              SampledFunction, evaluate, sup_distance, total_variation)

ZERO = PiecewiseFunction.constant(F(0))


def toy_staircase():
    return build_staircase(ZERO, StaircasePlan(2, 2, F(1)))


def test_evaluate_examples():
    assert evaluate(ZERO, F(1, 2)) == 0
    assert evaluate(toy_staircase(), F(3, 10)) == F(1, 10)
    assert evaluate(PiecewiseFunction.linear(F(2), F(-1)), F(3, 4)) == F(1, 2)
    with pytest.raises(DomainError):
        evaluate(ZERO, F(3, 2))


def test_staircase_values_and_closure():
    s = toy_staircase()
    assert [s(F(t, 4)) for t in range(4)] == [0, F(1, 10), 0, F(1, 10)]
    assert s(F(1)) == 0
    # the piece owns its left endpoint
    assert s(F(1, 4)) == F(1, 10) and s.left_limit(1) == 0
    assert not s.is_continuous()


def test_sup_distance_examples():
    s = toy_staircase()
    assert sup_distance(s, s) == 0
    assert sup_distance(ZERO, s) == F(1, 10)
    a = SampledFunction.uniform([0, 1, 2])
    with pytest.raises(GridError):
        sup_distance(a, SampledFunction.uniform([0, 1]))


def test_total_variation_examples():
    assert total_variation(SampledFunction.uniform([0, 0.2, 0.7, 1.0])) == pytest.approx(1.0)
    assert total_variation(SampledFunction.uniform([0, 1, 0, 1])) == 3
    assert total_variation(toy_staircase()) == F(2, 5)


def test_sampled_validation():
    with pytest.raises(GridError):
        SampledFunction(np.array([0.0, 0.6, 0.5, 1.0]), np.zeros(4))
    with pytest.raises(GridError):
        SampledFunction(np.array([0.1, 1.0]), np.zeros(2))
    with pytest.raises(ValueError):
        SampledFunction.uniform([0.0, float("inf")])


def test_ball():
    b = Ball(ZERO, F(1))
    assert b.contains(PiecewiseFunction.constant(F(1)))
    assert b.contains_ball(Ball(PiecewiseFunction.constant(F(1, 2)), F(1, 2)))
    with pytest.raises(ValueError):
        Ball(ZERO, 0)


rationals = st.fractions(min_value=-5, max_value=5, max_denominator=50)


@st.composite
def pw_functions(draw, continuous=False):
    n = draw(st.integers(min_value=1, max_value=6))
    inner = sorted(set(draw(st.lists(st.fractions(min_value=F(1, 100), max_value=F(99, 100),
                                                  max_denominator=100), min_size=n - 1,
                                     max_size=n - 1))))
    bps = [F(0), *inner, F(1)]
    if continuous:
        ys = [draw(rationals) for _ in bps]
        return PiecewiseFunction.interpolant(bps, ys)
    pieces = [Piece(draw(rationals), draw(rationals)) for _ in bps[:-1]]
    return PiecewiseFunction.from_pieces(bps, pieces, "left", draw(rationals))


@given(pw_functions(), pw_functions(), pw_functions())
def test_sup_distance_is_a_metric(f, g, h):
    assert sup_distance(f, g) == sup_distance(g, f)
    assert sup_distance(f, h) <= sup_distance(f, g) + sup_distance(g, h)
    assert (sup_distance(f, g) == 0) == f.equals(g)


@given(pw_functions(), st.fractions(min_value=0, max_value=1, max_denominator=97))
def test_variation_invariant_under_refinement(f, x):
    assert f.refine(x).total_variation() == f.total_variation()
    assert f.refine(x).equals(f)


@given(st.lists(st.floats(min_value=-1e3, max_value=1e3), min_size=2, max_size=30))
def test_monotone_samples_variation_telescopes(vals):
    vals = sorted(vals)
    f = SampledFunction.uniform(vals)
    assert f.total_variation() == pytest.approx(abs(vals[-1] - vals[0]), abs=1e-9)


@given(pw_functions())
def test_sampling_reproduces_evaluation(f):
    grid = [F(i, 16) for i in range(17)]
    assert f.sample(grid) == [f(x) for x in grid]


@given(pw_functions(continuous=True), pw_functions(continuous=True))
def test_sum_and_difference_pointwise(f, g):
    for x in [F(i, 13) for i in range(14)]:
        assert (f + g)(x) == f(x) + g(x)
        assert (f - g)(x) == f(x) - g(x)


def test_interpolant_of_samples_matches_grid():
    f = SampledFunction.uniform([0.0, 0.5, -0.25, 1.0, 0.0])
    g = f.interpolant(exact=True)
    assert [float(g(F(float(x)))) for x in f.grid] == list(f.values)
    assert float(g.total_variation()) == pytest.approx(f.total_variation())
    assert f.reversed().reversed() == f
