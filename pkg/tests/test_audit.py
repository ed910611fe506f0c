from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dimlab.audit import (Adversary, AdversaryError, Probe, agreement_set, agreement_set_naive,
                          audit_pair, audit_sampled, bv_battery, bv_class_check,
                          empirical_agreement_audit, holder_battery, holder_class_check,
                          standard_probes)
from dimlab.construction import (BVParams, HolderParams, build_bv_certificate,
                                 build_holder_certificate, center_from_spec)
from dimlab.functions import PiecewiseFunction, SampledFunction

ZERO = center_from_spec("constant:c=0")


@pytest.fixture(scope="module")
def holder_cert():
    return build_holder_certificate(HolderParams("1/2", 2, 1, 2, "1/4"), ZERO)


@pytest.fixture(scope="module")
def bv_cert():
    return build_bv_certificate(BVParams(2, 1, 1), ZERO)


def test_class_checks():
    assert holder_class_check(PiecewiseFunction.linear(F(1), F(0)), F(1, 2), 1)
    assert not holder_class_check(PiecewiseFunction.linear(F(2), F(0)), F(1, 2), 1)
    # x -> x^(1/2) interpolated at 0, 1/4, 1 is 1/2-Hölder with K = 1
    g = PiecewiseFunction.interpolant([F(0), F(1, 4), F(1)], [F(0), F(1, 2), F(1)])
    assert holder_class_check(g, F(1, 2), 1)
    assert bv_class_check(g, 1) and not bv_class_check(g, F(99, 100))


nodes = st.lists(st.fractions(min_value=-2, max_value=2, max_denominator=6), min_size=2, max_size=7)


def _interp(ys):
    xs = [F(i, len(ys) - 1) for i in range(len(ys))]
    return PiecewiseFunction.interpolant(xs, ys)


@given(nodes, nodes)
def test_agreement_set_matches_naive(a, b):
    f, g = _interp(a), _interp(b)
    assert agreement_set(f, g) == agreement_set_naive(f, g)


@given(nodes, nodes, st.fractions(min_value=F(1, 5), max_value=5, max_denominator=7))
def test_agreement_set_invariant_under_scaling(a, b, K):
    f, g = _interp(a), _interp(b)
    assert agreement_set(f.scale(K), g.scale(K)) == agreement_set(f, g)


def test_constant_adversary_meets_once_per_block(holder_cert):
    probe = Probe("f1", holder_cert.f1)
    level = holder_cert.staircase.pieces[1].intercept
    row = audit_pair(holder_cert, probe, Adversary("c", "constant", PiecewiseFunction.constant(level)))
    assert row.meets and row.max_meets == 1 and row.ok


def test_f1_against_itself_when_in_class(bv_cert):
    # f1 has variation above 1 so it is not a valid BV adversary
    with pytest.raises(AdversaryError):
        empirical_agreement_audit(bv_cert, [Adversary("self", "self", bv_cert.f1)])


def test_holder_battery_audit(holder_cert):
    probes = standard_probes(holder_cert, n_random=2, seed=5)
    battery = holder_battery(holder_cert, probes, size=24, seed=1)
    assert len({a.kind for a in battery}) == 4
    report = empirical_agreement_audit(holder_cert, battery, probes)
    assert report.ok and len(report.rows) == 24 * len(probes)
    assert max(r.max_meets for r in report.rows) <= 1
    assert all(r.cover_cost < 1 for r in report.rows)
    csv_text = report.to_csv()
    assert csv_text.splitlines()[0] == "adversary_id,probe_id,block,l_i,cover_cost"


def test_bv_battery_audit(bv_cert):
    probes = standard_probes(bv_cert)
    battery = bv_battery(bv_cert, probes, size=20, seed=2)
    report = empirical_agreement_audit(bv_cert, battery, probes)
    assert report.ok and report.bound == 253
    assert max(r.total for r in report.rows) <= 253


def test_parallel_audit_matches_serial(bv_cert):
    probes = standard_probes(bv_cert)
    battery = bv_battery(bv_cert, probes, size=8, seed=3)
    a = empirical_agreement_audit(bv_cert, battery, probes, jobs=1)
    b = empirical_agreement_audit(bv_cert, battery, probes, jobs=2)
    assert a.to_csv() == b.to_csv()


def test_out_of_class_adversary_rejected(holder_cert):
    steep = Adversary("steep", "line", PiecewiseFunction.linear(F(100), F(0)))
    with pytest.raises(AdversaryError):
        empirical_agreement_audit(holder_cert, [steep])


def test_sampled_audit_is_flagged_empirical(holder_cert):
    g = SampledFunction.uniform(np.zeros(257))
    row = audit_sampled(holder_cert, g, Probe("f1", holder_cert.f1), tolerance=1e-12)
    assert row.empirical
