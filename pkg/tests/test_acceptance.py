"""Acceptance criteria 1-8, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear in the output)
or directly with ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import math
import sys
import time
from fractions import Fraction as F

import mpmath
import numpy as np
import pytest

from dimlab.agreement import (compat_matrix, longest_monotone_length_quadratic, max_bv_subset,
                              max_holder_subset, max_monotone_subset, probe_csv, probe_medians,
                              threshold_probe)
from dimlab.audit import (bv_battery, empirical_agreement_audit, holder_battery,
                          standard_probes)
from dimlab.capacity import (EXACT_DPS, GridSubset, brute_force_cover_cost, cantor_cells,
                             estimate_dimension, optimal_cover)
from dimlab.construction import (BVParams, ConstructionError, HolderParams, StaircasePlan,
                                 build_bv_certificate, build_holder_certificate,
                                 center_from_spec, solve_bv_parameters, solve_parameters)
from dimlab.exact import pow_compare
from dimlab.functions import SampledFunction, sup_distance
from dimlab.rng import Xoshiro256
from dimlab.verify import verify_certificate


def report(n: int, ok: bool, detail: str, seconds: float, limit: float | None = None) -> None:
    timing = f"{seconds:.1f}s" + (f" (limit {limit:.0f}s)" if limit else "")
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail} [{timing}]"
    capman = getattr(report, "capman", None)
    if capman is not None:
        with capman.global_and_fixture_disabled():
            print("\n" + line, flush=True)
    else:
        print(line, flush=True)


@pytest.fixture(autouse=True)
def _show_lines(request):
    report.capman = request.config.pluginmanager.getplugin("capturemanager")
    yield
    report.capman = None


ZERO = center_from_spec("constant:c=0")


# --------------------------------------------------------------------------

def test_criterion_1_cover_dp_matches_brute_force():
    t = time.time()
    mismatches = 0
    with mpmath.workdps(EXACT_DPS):
        for d in (F(3, 10), F(1, 2), F(7, 10), F(1)):
            for mask in range(256):
                cells = GridSubset(F(1, 8), tuple(i for i in range(8) if mask >> i & 1))
                dp, cover = optimal_cover(cells, d, exact=True)
                if dp != brute_force_cover_cost(cells, d, exact=True) or not cover.covers(cells.runs()):
                    mismatches += 1
    dt = time.time() - t
    ok = mismatches == 0 and dt < 60
    report(1, ok, f"256 subsets x 4 exponents, {mismatches} DP/brute-force mismatches", dt, 60)
    assert ok


def test_criterion_2_holder_certificate():
    t = time.time()
    params = HolderParams("1/2", 2, 1, 1)
    plan = solve_parameters(params, ZERO.modulus)
    solved = build_holder_certificate(params, ZERO, plan)
    ref = build_holder_certificate(params, ZERO, StaircasePlan(2000, 7, 1))
    problems = []
    for cert in (solved, ref):
        checks = verify_certificate(cert)
        if not (cert.accepted and all(c.ok for c in checks)):
            problems.append(f"({cert.plan.m},{cert.plan.k}) fails verification")
        e = cert.entry
        if not (e("separation").verdict and e("window_lower").verdict and e("window_upper").verdict):
            problems.append("separation/window")
        if not e("system_budget").lhs < F(1, 2):
            problems.append("system budget")
        if e("block_budget").lhs != F(1, cert.plan.k) or not F(1, cert.plan.k) < F(1, 2):
            problems.append("block budget")
        lo, hi = cert.entry("capacity_total").lhs, cert.entry("capacity_total").lhs_upper
        if not (hi if hi is not None else lo) < 1:
            problems.append("total witness cost")
    dt = time.time() - t
    ok = not problems and dt < 60
    detail = (f"solver plan (m,k)=({plan.m},{plan.k}), reference (2000,7) verified; "
              f"total cover cost {float(ref.entry('capacity_total').lhs):.4f} < 1")
    report(2, ok, detail if not problems else "; ".join(problems), dt, 60)
    assert ok


def test_criterion_3_holder_audit():
    t = time.time()
    cert = build_holder_certificate(HolderParams("1/2", 2, 1, 1), ZERO)
    probes = standard_probes(cert)
    battery = holder_battery(cert, probes, size=200, seed=2024)
    levels = {p.intercept for p in cert.staircase.pieces}
    const_levels = {g.function.values[0] for g in battery if g.kind == "constant"}
    audit = empirical_agreement_audit(cert, battery, probes)
    worst = max(r.max_meets for r in audit.rows)
    cost = max(r.cover_cost for r in audit.rows)
    dt = time.time() - t
    ok = (len(battery) >= 200 and levels <= const_levels and audit.ok and worst <= 1
          and cost < 1 and dt < 300)
    report(3, ok, f"{len(battery)} adversaries x {len(probes)} probes, max meets/block {worst}, "
                  f"max audited cover cost {cost:.4f} < 1, violations {len(audit.violations)}", dt, 300)
    assert ok


def test_criterion_4_bv_certificate():
    t = time.time()
    params = BVParams(2, 1, 1)
    plan = solve_bv_parameters(params, ZERO.modulus)

    def holds(m):
        # (10/r0 + 1) m^(-2/N) < 1/(2M), decided exactly
        return pow_compare(F(1, m), F(2, params.N), F(1, 2 * params.M) / (10 / params.r0 + 1)) < 0

    minimal = holds(plan.m) and not any(holds(m) for m in range(1, plan.m))
    cert = build_bv_certificate(params, ZERO, plan)
    verified = cert.accepted and all(c.ok for c in verify_certificate(cert))
    probes = standard_probes(cert)
    audit = empirical_agreement_audit(cert, bv_battery(cert, probes, size=200, seed=2024), probes)
    bound = params.count_bound(plan.m, plan.k)
    worst = max(r.total for r in audit.rows)
    dt = time.time() - t
    ok = minimal and verified and audit.ok and worst <= bound and dt < 120
    report(4, ok, f"minimal m={plan.m} (k=m) for 11*m^(-2/N) < 1/2 with N=2; the quoted m=5 "
                  f"solves 11/m^2 < 1/2 instead; max sum l_i {worst} <= m+10k/r0 = {bound}", dt, 120)
    assert ok


def test_criterion_5_ball_nesting():
    t = time.time()
    rng = Xoshiro256(55)
    centres = ["constant:c=1/3", "linear:slope=1/2,intercept=-1", "linear:slope=-1/4",
               "takagi:terms=2", "takagi:terms=3"]
    accepted, bad, tries = 0, 0, 0
    while accepted < 50 and tries < 500:
        tries += 1
        alpha = ["1/3", "1/2", "3/5", "2/3"][rng.randint(0, 3)]
        N = [2, 3, 5][rng.randint(0, 2)]
        r0 = ["2", "4", "3"][rng.randint(0, 2)]
        K = ["1/4", "1/2"][rng.randint(0, 1)]
        M = rng.randint(1, 2)
        centre = center_from_spec(centres[rng.randint(0, len(centres) - 1)])
        try:
            params = HolderParams(alpha, N, M, r0, K)
            plan = solve_parameters(params, centre.modulus, m_max=400)
        except ConstructionError:
            continue
        if plan.steps > 1500:
            continue
        cert = build_holder_certificate(params, centre, plan)
        if not cert.accepted:
            continue
        accepted += 1
        if not sup_distance(cert.f0, cert.f1) + cert.r1 <= cert.plan.r0:
            bad += 1
    dt = time.time() - t
    ok = accepted == 50 and bad == 0
    report(5, ok, f"{accepted} random accepted certificates, {bad} with ||f0-f1|| + r1 > r0", dt)
    assert ok


def _brute_holder(adj):
    n = len(adj)
    nbr = [sum(1 << j for j in range(n) if adj[i, j]) for i in range(n)]
    valid = [True] * (1 << n)
    best = 0
    for mask in range(1, 1 << n):
        low = (mask & -mask).bit_length() - 1
        rest = mask & (mask - 1)
        valid[mask] = valid[rest] and (nbr[low] & rest) == rest
        if valid[mask]:
            best = max(best, bin(mask).count("1"))
    return best


def _brute_bv(ys, V):
    n = len(ys)
    var = [F(0)] * (1 << n)
    best = 0
    for mask in range(1, 1 << n):
        high = mask.bit_length() - 1
        rest = mask & ~(1 << high)
        var[mask] = var[rest] + (abs(ys[high] - ys[rest.bit_length() - 1]) if rest else 0)
        if var[mask] <= V:
            best = max(best, bin(mask).count("1"))
    return best


def test_criterion_6_subset_search_oracles():
    t = time.time()
    rng = np.random.default_rng(6)
    bad = []
    for inst in range(100):
        n = int(rng.integers(2, 15))
        f = SampledFunction.uniform(np.round(rng.normal(size=n), 2))
        alpha = F(int(rng.integers(1, 11)), 10)
        K = F(int(rng.integers(1, 31)), 10)
        V = F(int(rng.integers(0, 41)), 10)
        ys = [F(float(v)) for v in f.values]
        w = max_holder_subset(f, alpha, K, budget=20, dimension=False)
        if w.mode != "exact" or w.size != _brute_holder(compat_matrix(f.grid, f.values, alpha, K)):
            bad.append(("holder", inst))
        if max_bv_subset(f, V, dimension=False).size != _brute_bv(ys, V):
            bad.append(("bv", inst))
        if max_monotone_subset(f, dimension=False).size != longest_monotone_length_quadratic(ys):
            bad.append(("monotone", inst))
    dt = time.time() - t
    ok = not bad and dt < 120
    report(6, ok, f"100 instances n<=14: {len(bad)} mismatches against 2^n enumeration / O(n^2) DP",
           dt, 120)
    assert ok


def test_criterion_7_dimension_calibration():
    t = time.time()
    target = math.log(2) / math.log(3)
    cantor = estimate_dimension(cantor_cells(10), [F(1, 3 ** j) for j in range(1, 11)]).slope
    scales = [F(1, 2 ** j) for j in range(1, 11)]
    full = estimate_dimension(GridSubset.full(1024), scales).slope
    single = estimate_dimension(GridSubset(F(1, 1024), (333,)), scales).slope
    dt = time.time() - t
    ok = abs(cantor - target) <= 0.05 and abs(full - 1) <= 0.02 and abs(single) <= 0.02
    report(7, ok, f"Cantor {cantor:.4f} (target {target:.4f}), interval {full:.4f}, "
                  f"singleton {single:.4f}", dt)
    assert ok


def test_criterion_8_probe_reproducible_and_monotone():
    t = time.time()
    alphas = ["1/4", "1/3", "1/2", "2/3", "3/4"]
    args = ("midpoint_displacement:hurst=1/2", "holder", alphas, 5, 20240101, (129,))
    first = probe_csv(threshold_probe(*args))
    second = probe_csv(threshold_probe(*args))
    parallel = probe_csv(threshold_probe(*args, jobs=2))
    rows = threshold_probe(*args)
    medians = [m["median_box_dim"] for m in probe_medians(rows)]
    non_increasing = all(b <= a for a, b in zip(medians, medians[1:]))
    identical = first == second == parallel
    dt = time.time() - t
    ok = identical and non_increasing
    report(8, ok, "probe CSV byte-identical across runs and worker counts: "
                  f"{identical}; Hölder-witness median box dimension over alpha "
                  f"{', '.join(alphas)}: {', '.join(f'{m:.3f}' for m in medians)} "
                  "(non-increasing; a property of the search on proxies, the theorems' "
                  "residuality and exact Hausdorff bounds are not desk-checkable)", dt)
    assert ok


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
