"""Certificate files and their independent re-verification.

``verify_certificate`` never calls the solver's comparison helpers: each
inequality with a fractional power ``a = p/q`` is re-derived in its raised
integer form (for example ``K^q (2/(mk))^p < (r0/(10k))^q``), structural
claims are re-checked from the stored functions, and every stored ledger
number must match its recomputation exactly.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction

from .construction import (FLOAT_MARGIN, BVParams, ConstructionCertificate, HolderParams,
                           IntervalSystem, LedgerEntry, StaircasePlan, build_staircase)
from .exact import as_fraction, pow_bounds, sum_pow_bounds, sum_pow_less
from .functions import sup_distance
from .generator import EXACT_FAMILIES, GeneratorSpec, GeneratorError, modulus_oracle
from .serialize import piecewise_from_json, piecewise_to_json

__all__ = ["FORMAT", "Check", "certificate_to_json", "certificate_from_json",
           "verify_certificate", "HOLDER_IDS", "BV_IDS"]

FORMAT = "dimlab-certificate/1"

_COMMON = ["modulus", "system_cover", "system_budget", "block_budget", "capacity_total",
           "staircase_distance", "repair_distance", "center_distance", "step_margin",
           "radius", "ball_nesting"]
HOLDER_IDS = frozenset(_COMMON + ["separation", "window_lower", "window_upper"])
BV_IDS = frozenset(_COMMON + ["count_bound"])


@dataclass
class Check:
    id: str
    ok: bool
    detail: str = ""


def certificate_to_json(cert: ConstructionCertificate) -> dict:
    return {
        "format": FORMAT,
        "kind": cert.kind,
        "mode": "empirical" if cert.float_mode else "exact",
        "accepted": cert.accepted,
        "params": cert.params.to_json(),
        "center": cert.center,
        "modulus": {"name": cert.modulus, "certified": cert.modulus_certified},
        "plan": cert.plan.to_json(),
        "system": cert.system.to_json(),
        "ledger": [e.to_json() for e in cert.ledger],
        "f0": piecewise_to_json(cert.f0),
        "staircase": piecewise_to_json(cert.staircase),
        "f1": piecewise_to_json(cert.f1),
    }


def certificate_from_json(data: dict) -> ConstructionCertificate:
    if data.get("format") != FORMAT:
        raise ValueError(f"not a {FORMAT} file")
    kind = data["kind"]
    if kind == "holder":
        params = HolderParams.from_json(data["params"])
    elif kind == "bv":
        params = BVParams.from_json(data["params"])
    else:
        raise ValueError(f"unknown certificate kind {kind!r}")
    return ConstructionCertificate(
        kind, params, data["center"], data["modulus"]["name"], bool(data["modulus"]["certified"]),
        StaircasePlan.from_json(data["plan"]), IntervalSystem.from_json(data["system"]),
        piecewise_from_json(data["f0"]), piecewise_from_json(data["staircase"]),
        piecewise_from_json(data["f1"]), [LedgerEntry.from_json(e) for e in data["ledger"]],
    )


# --------------------------------------------------------------------------

def _raised_less(lhs_base: Fraction, lhs_exp: int, rhs_base: Fraction, rhs_exp: int) -> bool:
    return lhs_base ** lhs_exp < rhs_base ** rhs_exp


def _recompute_holder(cert: ConstructionCertificate) -> dict[str, LedgerEntry]:
    p: HolderParams = cert.params
    m, k = cert.plan.m, cert.plan.k
    out = {}
    if p.float_mode:
        a = p.alpha
        sep = float(p.K) * (2 / (m * k)) ** a
        out["separation"] = LedgerEntry("separation", "<", sep, float(p.r0) / (10 * k),
                                        sep + FLOAT_MARGIN < float(p.r0) / (10 * k))
        top = (float(p.r0) / (10 * float(p.K))) ** (1 / (1 - a)) * (m / 2) ** (a / (1 - a))
        out["window_lower"] = LedgerEntry("window_lower", "<", top / 2, float(k),
                                          top / 2 + FLOAT_MARGIN < k)
        out["window_upper"] = LedgerEntry("window_upper", "<", float(k), top, k + FLOAT_MARGIN < top)
        d = 1 - a + 1 / p.N
        blk = m * (1 / (m * k)) ** d
        out["block_budget"] = LedgerEntry("block_budget", "<", blk, float(p.budget),
                                          blk + FLOAT_MARGIN < float(p.budget))
        return out
    a = p.alpha
    ap, aq = a.numerator, a.denominator
    r0, K = p.r0, p.K
    x = Fraction(2, m * k)
    lo, hi = pow_bounds(x, a)
    ok = _raised_less(K ** aq * x ** ap, 1, r0 / (10 * k), aq)
    out["separation"] = LedgerEntry("separation", "<", K * lo, r0 / (10 * k), ok,
                                    None if lo == hi else K * hi)
    base = r0 / (10 * K)
    l1, h1 = pow_bounds(base, Fraction(aq, aq - ap))
    l2, h2 = pow_bounds(Fraction(m, 2), Fraction(ap, aq - ap))
    lower_ok = base ** aq * Fraction(m, 2) ** ap < Fraction(2 * k) ** (aq - ap)
    upper_ok = Fraction(k) ** (aq - ap) < base ** aq * Fraction(m, 2) ** ap
    out["window_lower"] = LedgerEntry("window_lower", "<", l1 * l2 / 2, Fraction(k), lower_ok,
                                      h1 * h2 / 2)
    out["window_upper"] = LedgerEntry("window_upper", "<", Fraction(k), l1 * l2, upper_ok)
    d = 1 - a + Fraction(1, p.N)
    dp, dq = d.numerator, d.denominator
    y = Fraction(1, m * k)
    lo, hi = pow_bounds(y, d)
    blk_ok = Fraction(m) ** dq * y ** dp < p.budget ** dq
    out["block_budget"] = LedgerEntry("block_budget", "<", m * lo, p.budget, blk_ok,
                                      None if lo == hi else m * hi)
    return out


def _recompute_bv(cert: ConstructionCertificate) -> dict[str, LedgerEntry]:
    p: BVParams = cert.params
    m = cert.plan.m
    coef = 10 * p.V / p.r0 + 1
    e = Fraction(2, p.N)
    lo, hi = pow_bounds(Fraction(1, m), e)
    ok = coef ** p.N * Fraction(1, m) ** 2 < p.budget ** p.N
    bound = m + 10 * cert.plan.k * p.V / p.r0
    return {
        "block_budget": LedgerEntry("block_budget", "<", coef * lo, p.budget, ok,
                                    None if lo == hi else coef * hi),
        "count_bound": LedgerEntry("count_bound", "=", bound, bound, True),
    }


def _recompute_modulus(cert: ConstructionCertificate):
    t = Fraction(2, cert.plan.m)
    if cert.modulus_certified:
        try:
            spec = GeneratorSpec.parse(cert.center)
        except GeneratorError:
            spec = None
        if spec is not None and spec.family in EXACT_FAMILIES:
            return modulus_oracle(spec)(t)
        if cert.modulus.startswith("Lipschitz"):
            if not cert.f0.is_continuous():
                raise ValueError("centre function is not continuous")
            return cert.f0.lipschitz() * t
        raise ValueError(f"cannot re-derive modulus {cert.modulus!r}")
    return cert.f0.lipschitz() * t


def _recompute_common(cert: ConstructionCertificate) -> dict[str, LedgerEntry]:
    plan, system, p = cert.plan, cert.system, cert.params
    r0, r1 = plan.r0, plan.r1
    out = {}
    fm = p.float_mode
    mod = _recompute_modulus(cert)
    if fm or isinstance(mod, float):
        out["modulus"] = LedgerEntry("modulus", "<", float(mod), float(r0) / 5,
                                     float(mod) + FLOAT_MARGIN < float(r0) / 5)
    else:
        out["modulus"] = LedgerEntry("modulus", "<", mod, r0 / 5, mod < r0 / 5)
    missing = sum(1 for x in plan.breakpoints if not system.contains(x))
    out["system_cover"] = LedgerEntry("system_cover", "=", Fraction(missing), Fraction(0),
                                      missing == 0 and system.is_disjoint())
    counts: dict[Fraction, int] = {}
    for length in system.lengths():
        counts[length] = counts.get(length, 0) + 1
    terms = [(Fraction(c), length) for length, c in counts.items()]
    d = p.exponent
    if fm:
        s = math.fsum(float(c) * float(x) ** d for c, x in terms)
        out["system_budget"] = LedgerEntry("system_budget", "<", s, float(p.budget),
                                           s + FLOAT_MARGIN < float(p.budget))
    else:
        lo, hi = sum_pow_bounds(terms, d, 64)
        ok = sum_pow_less(terms, d, p.budget)[0]
        out["system_budget"] = LedgerEntry("system_budget", "<", lo, p.budget, ok,
                                           None if lo == hi else hi)
    d01 = sup_distance(cert.f0, cert.f1)
    for key, lhs, rel, rhs in [
        ("staircase_distance", sup_distance(cert.f0, cert.staircase), "<=", 2 * r0 / 5),
        ("repair_distance", sup_distance(cert.staircase, cert.f1), "<=", 2 * r0 / 5),
        ("center_distance", d01, "<=", 4 * r0 / 5),
        ("step_margin", plan.jump - 2 * r1, "=", r0 / (10 * plan.k)),
        ("radius", r1, "<=", r0 / 5),
        ("ball_nesting", d01 + r1, "<=", r0),
    ]:
        verdict = lhs == rhs if rel == "=" else lhs <= rhs
        out[key] = LedgerEntry(key, rel, lhs, rhs, verdict)
    return out


def _total(sys_e: LedgerEntry, blk_e: LedgerEntry, M: int, fm: bool) -> LedgerEntry:
    rhs = Fraction(1, M)
    if fm:
        lhs = sys_e.lhs + blk_e.lhs
        return LedgerEntry("capacity_total", "<", lhs, float(rhs), lhs + FLOAT_MARGIN < float(rhs))
    up = lambda e: e.lhs if e.lhs_upper is None else e.lhs_upper
    lo = sys_e.lhs + blk_e.lhs
    hi = up(sys_e) + up(blk_e)
    ok = sys_e.verdict and blk_e.verdict and sys_e.rhs + blk_e.rhs <= rhs
    return LedgerEntry("capacity_total", "<", lo, rhs, ok, None if lo == hi else hi)


def _same(stored, fresh, fm: bool) -> bool:
    if stored is None or fresh is None:
        return stored is None and fresh is None
    if fm:
        return math.isclose(float(stored), float(fresh), rel_tol=1e-12, abs_tol=1e-15)
    return as_fraction(stored) == as_fraction(fresh) and not isinstance(stored, float)


def _structural_checks(cert: ConstructionCertificate) -> list[Check]:
    checks = []
    plan, system = cert.plan, cert.system
    p = cert.params
    checks.append(Check("plan_r0", plan.r0 == p.r0, "plan and parameters share r0"))
    if cert.kind == "bv":
        checks.append(Check("plan_k_equals_m", plan.k == plan.m, "k = m"))
    stair = build_staircase(cert.f0, plan)
    checks.append(Check("staircase_formula", stair == cert.staircase,
                        "stored staircase matches f0(i/m) + j r0/(5k)"))
    f1 = cert.f1
    checks.append(Check("f1_continuous", f1.is_continuous(), "f1 has no jumps"))
    checks.append(Check("f1_endpoints", f1(Fraction(0)) == cert.f0(Fraction(0))
                        and f1(Fraction(1)) == cert.f0(Fraction(1)), "f1 = f0 at 0 and 1"))
    # f1 agrees with the staircase off the system and is linear on each interval
    h = f1 - cert.staircase
    agree = True
    for t, piece in enumerate(h.pieces):
        mid = (h.breakpoints[t] + h.breakpoints[t + 1]) / 2
        if not system.contains(mid) and (piece.slope != 0 or piece.intercept != 0):
            agree = False
            break
    if agree:
        agree = all(v == 0 for x, v in zip(h.breakpoints, h.values) if not system.contains(x))
    checks.append(Check("f1_agrees_off_system", agree, "f1 = staircase outside the intervals"))
    linear = True
    for a, b in system.intervals:
        lo = bisect.bisect_right(f1.breakpoints, a)
        hi = bisect.bisect_left(f1.breakpoints, b)
        if hi > lo:
            linear = False
            break
    checks.append(Check("f1_linear_on_system", linear, "no breakpoint of f1 inside an interval"))
    return checks


def verify_certificate(cert: ConstructionCertificate) -> list[Check]:
    """Re-derive every ledger line and structural claim; all checks must pass."""
    checks = _structural_checks(cert)
    fresh = _recompute_common(cert)
    if cert.kind == "holder":
        fresh.update(_recompute_holder(cert))
        expected = HOLDER_IDS
    else:
        fresh.update(_recompute_bv(cert))
        expected = BV_IDS
    fresh["capacity_total"] = _total(fresh["system_budget"], fresh["block_budget"],
                                     cert.params.M, cert.float_mode)
    stored = {e.id: e for e in cert.ledger}
    ids = [e.id for e in cert.ledger]
    checks.append(Check("ledger_ids", set(ids) == expected and len(ids) == len(set(ids)),
                        f"ledger has exactly the lines {sorted(expected)}"))
    fm = cert.float_mode
    for key in sorted(expected):
        new = fresh[key]
        old = stored.get(key)
        if old is None:
            checks.append(Check(key, False, "missing from ledger"))
            continue
        problems = []
        if not new.verdict:
            problems.append("inequality fails on recomputation")
        if not old.verdict:
            problems.append("ledger records a failed verdict")
        if old.relation != new.relation:
            problems.append(f"relation {old.relation!r} != {new.relation!r}")
        for name in ("lhs", "lhs_upper", "rhs"):
            if not _same(getattr(old, name), getattr(new, name), fm):
                problems.append(f"{name} {getattr(old, name)} != recomputed {getattr(new, name)}")
        checks.append(Check(key, not problems, "; ".join(problems) or new.relation))
    return checks
