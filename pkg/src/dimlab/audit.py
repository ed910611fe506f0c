"""Spot-checks of a certificate against concrete adversaries.

For a probe ``f`` in the ball ``B(f1, r1)`` and an in-class adversary ``g``
(Hölder with the certificate's exponent and constant, or variation at most
``V``), the agreement set ``{f = g}`` of two continuous piecewise-linear
rational functions is computed exactly.  Its part outside the interval system
is assigned to step intervals ``(t/(mk), (t+1)/(mk))``; ``l_i`` counts the
step intervals met in block ``i``.  The audited cover cost is the system's
cost plus an optimal cover of the remaining agreement set, an upper bound
for the capacity of ``{f = g}`` at the certificate exponent.
"""
from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .capacity import GridSubset, optimal_interval_cover
from .construction import ConstructionCertificate
from .exact import as_fraction, pow_bounds, pow_compare
from .functions import PiecewiseFunction, SampledFunction
from .rng import Xoshiro256

__all__ = [
    "AdversaryError",
    "Adversary",
    "Probe",
    "AuditRow",
    "AuditReport",
    "holder_class_check",
    "bv_class_check",
    "agreement_set",
    "agreement_set_naive",
    "standard_probes",
    "holder_battery",
    "bv_battery",
    "default_battery",
    "audit_pair",
    "empirical_agreement_audit",
    "audit_sampled",
]


class AdversaryError(ValueError):
    """An adversary outside the class the certificate speaks about."""


@dataclass
class Adversary:
    id: str
    kind: str
    function: PiecewiseFunction


@dataclass
class Probe:
    id: str
    function: PiecewiseFunction


# --------------------------------------------------------------------------
# class membership

def holder_class_check(g: PiecewiseFunction, alpha, K) -> bool:
    """Exact test of ``|g(x) - g(y)| <= K |x - y|^alpha`` on [0, 1].

    For continuous piecewise-linear ``g`` it suffices to test breakpoint
    pairs: on each cell of breakpoint pairs ``|g(x) - g(y)|`` is convex and
    ``|x - y|^alpha`` concave, so the excess is maximised at a vertex.
    """
    if not g.is_continuous():
        return False
    K = as_fraction(K)
    xs, vs = g.breakpoints, g.values
    n = len(xs)
    for i in range(n):
        for j in range(i + 1, n):
            dv = abs(vs[j] - vs[i])
            if dv == 0:
                continue
            if pow_compare(xs[j] - xs[i], alpha, dv / K) < 0:
                return False
    return True


def bv_class_check(g: PiecewiseFunction, V) -> bool:
    return g.total_variation() <= as_fraction(V)


def _battery_alpha(alpha):
    """Rational exponent whose Hölder class sits inside the class of ``alpha``."""
    if isinstance(alpha, Fraction):
        return alpha
    return Fraction(math.ceil(alpha * 1000), 1000)


# --------------------------------------------------------------------------
# agreement sets

def _merge_closed(items):
    items.sort()
    out = []
    for a, b in items:
        if out and a <= out[-1][1]:
            if b > out[-1][1]:
                out[-1] = (out[-1][0], b)
        else:
            out.append((a, b))
    return out


def _zeros_on(p, q, s0, s1, items):
    """Zero set of ``p - q`` (two linear pieces) on the open gap ``(s0, s1)``."""
    slope = p.slope - q.slope
    icpt = p.intercept - q.intercept
    if slope == 0:
        if icpt == 0:
            items.append((s0, s1))
        return
    r = -icpt / slope
    if s0 < r < s1:
        items.append((r, r))


def _bisect_right(seq, fseq, x) -> int:
    """``bisect_right`` on exact ``seq`` guided by its float image ``fseq``."""
    i = int(np.searchsorted(fseq, float(x), side="right"))
    while i > 0 and seq[i - 1] > x:
        i -= 1
    while i < len(seq) and seq[i] <= x:
        i += 1
    return i


def agreement_set_naive(f: PiecewiseFunction, g: PiecewiseFunction) -> list[tuple]:
    """``{f = g}`` as merged closed intervals, by scanning the difference function."""
    h = f - g
    items = []
    for x, v in zip(h.breakpoints, h.values):
        if v == 0:
            items.append((x, x))
    zero = type(h.pieces[0])(0, 0)
    for t, piece in enumerate(h.pieces):
        _zeros_on(piece, zero, h.breakpoints[t], h.breakpoints[t + 1], items)
    return _merge_closed(items)


class ProbeIndex:
    """Float summaries of a probe for fast candidate filtering."""

    def __init__(self, f: PiecewiseFunction):
        self.f = f
        self.xs = np.array([float(x) for x in f.breakpoints])
        self.vals = np.array([float(v) for v in f.values])
        self.right = np.array([float(p.at(x)) for p, x in zip(f.pieces, f.breakpoints)])
        self.left = np.array([float(p.at(x)) for p, x in zip(f.pieces, f.breakpoints[1:])])
        self.scale = 1.0 + float(np.max(np.abs(self.vals)))


def agreement_set(f, g: PiecewiseFunction, index: Optional[ProbeIndex] = None) -> list[tuple]:
    """``{f = g}`` for continuous piecewise-linear ``f, g``, exact.

    Gaps of ``f`` are filtered in floating point with a generous tolerance
    and only the survivors are solved in exact arithmetic.
    """
    if index is None:
        index = f if isinstance(f, ProbeIndex) else ProbeIndex(f)
    f = index.f
    if not g.is_continuous():
        return agreement_set_naive(f, g)
    gx = np.array([float(x) for x in g.breakpoints])
    gv = np.array([float(v) for v in g.values])
    g_at = np.interp(index.xs, gx, gv)
    tol = 1e-7 * (index.scale + float(np.max(np.abs(gv))))
    d0 = index.right - g_at[:-1]
    d1 = index.left - g_at[1:]
    cand = (np.minimum(d0, d1) <= tol) & (np.maximum(d0, d1) >= -tol)
    for x in g.breakpoints[1:-1]:
        t = _bisect_right(f.breakpoints, index.xs, x) - 1
        cand[min(t, len(cand) - 1)] = True
        if f.breakpoints[t] == x and t > 0:
            cand[t - 1] = True
    pts = np.nonzero(np.abs(index.vals - g_at) <= tol)[0]
    items = []
    for t in pts:
        x = f.breakpoints[t]
        if f.values[t] == g(x):
            items.append((x, x))
    gb = g.breakpoints
    single = len(g.pieces) == 1
    for t in np.nonzero(cand)[0]:
        u, v = f.breakpoints[t], f.breakpoints[t + 1]
        p = f.pieces[t]
        if single:
            _zeros_on(p, g.pieces[0], u, v, items)
            continue
        lo = _bisect_right(gb, gx, u)
        hi = lo
        while hi < len(gb) and gb[hi] < v:
            hi += 1
        inner = gb[lo:hi]
        for off, s in enumerate(inner):
            if p.at(s) == g.values[lo + off]:
                items.append((s, s))
        cuts = [u, *inner, v]
        for off, (s0, s1) in enumerate(zip(cuts, cuts[1:])):
            _zeros_on(p, g.pieces[lo - 1 + off], s0, s1, items)
    return _merge_closed(items)


# --------------------------------------------------------------------------
# probes and batteries

def standard_probes(cert: ConstructionCertificate, n_random: int = 0, seed: int = 0) -> list[Probe]:
    """``f1``, ``f1 + r1``, ``f1 - r1`` and optional random members of ``B(f1, r1)``."""
    f1, r1 = cert.f1, cert.r1
    probes = [Probe("f1", f1), Probe("f1+r1", f1.shift(r1)), Probe("f1-r1", f1.shift(-r1))]
    rng = Xoshiro256(seed ^ 0x5EED)
    for i in range(n_random):
        count = 3 + rng.randint(0, 12)
        den = 1000 * cert.plan.steps
        xs = sorted({Fraction(rng.randint(0, den), den) for _ in range(count)})
        ys = [r1 * Fraction(rng.randint(-1000, 1000), 1000) for _ in xs]
        probes.append(Probe(f"rand{i}", f1 + PiecewiseFunction.interpolant(xs, ys)))
    return probes


def _levels(cert: ConstructionCertificate):
    return [p.intercept for p in cert.staircase.pieces]


def _flat_segment(cert: ConstructionCertificate, t: int) -> tuple[Fraction, Fraction]:
    mk, eps = cert.plan.steps, cert.system.half_width
    return Fraction(t, mk) + eps, Fraction(t + 1, mk) - eps


def _greedy_holder_nodes(nodes, alpha, K):
    """Clamp target values left to right so every pair respects the Hölder bound."""
    out = []
    for x, target in nodes:
        lo, hi = None, None
        for xs, vs in out:
            r = K * pow_bounds(x - xs, alpha)[0]
            lo = vs - r if lo is None else max(lo, vs - r)
            hi = vs + r if hi is None else min(hi, vs + r)
        if lo is None:
            v = target
        elif lo <= hi:
            v = min(max(target, lo), hi)
        else:
            v = out[-1][1]
        out.append((x, v))
    return out


def _budget_nodes(nodes, V):
    """Follow targets while the accumulated variation stays within ``V``."""
    out = []
    used = Fraction(0)
    for x, target in nodes:
        if not out:
            out.append((x, target))
            continue
        step = abs(target - out[-1][1])
        if used + step > V:
            remaining = V - used
            sign = 1 if target > out[-1][1] else -1
            out.append((x, out[-1][1] + sign * remaining))
            break
        used += step
        out.append((x, target))
    return out


def holder_battery(cert: ConstructionCertificate, probes: Sequence[Probe], size: int = 200,
                   seed: int = 0, window: int = 3) -> list[Adversary]:
    """Constants at staircase levels, slope-K lines, greedy trackers and segment followers."""
    p = cert.params
    alpha, K = _battery_alpha(p.alpha), p.K
    rng = Xoshiro256(seed)
    m, k, mk = cert.plan.m, cert.plan.k, cert.plan.steps
    r1 = cert.r1
    levels = _levels(cert)
    distinct = sorted(set(levels))
    out = []
    kinds = ("constant", "line", "tracker", "follower")
    for n in range(size):
        kind = kinds[n % len(kinds)]
        t = rng.randint(0, mk - 1)
        mid = Fraction(2 * t + 1, 2 * mk)
        if kind == "constant":
            # cycle through every distinct level, then through the shifts by r1
            c = n // len(kinds)
            shift = (0, 1, -1)[(c // len(distinct)) % 3]
            g = PiecewiseFunction.constant(distinct[c % len(distinct)] + shift * r1)
        elif kind == "line":
            shift = (-1, 0, 1)[rng.randint(0, 2)]
            slope = K * rng.sign()
            c = levels[t] + shift * r1
            g = PiecewiseFunction.linear(slope, c - slope * mid)
        else:
            probe = probes[rng.randint(0, len(probes) - 1)].function
            i0 = rng.randint(0, m - 1)
            ts = range(i0 * k, min(mk, (i0 + window) * k))
            if kind == "tracker":
                xs = [Fraction(2 * s + 1, 2 * mk) for s in ts]
            else:
                xs = [x for s in ts for x in _flat_segment(cert, s)]
            if rng.sign() < 0:
                # sweep right to left so the clamp favours the far end
                nodes = _greedy_holder_nodes([(1 - x, probe(x)) for x in reversed(xs)], alpha, K)
                nodes = [(1 - x, v) for x, v in reversed(nodes)]
            else:
                nodes = _greedy_holder_nodes([(x, probe(x)) for x in xs], alpha, K)
            g = PiecewiseFunction.interpolant([x for x, _ in nodes], [v for _, v in nodes])
        out.append(Adversary(f"H{n:04d}-{kind}", kind, g))
    return out


def bv_battery(cert: ConstructionCertificate, probes: Sequence[Probe], size: int = 200,
               seed: int = 0) -> list[Adversary]:
    """Constants, ramps of variation ``V``, budgeted trackers and followers."""
    V = cert.params.V
    rng = Xoshiro256(seed)
    mk = cert.plan.steps
    r1 = cert.r1
    levels = _levels(cert)
    out = []
    kinds = ("constant", "ramp", "tracker", "follower")
    for n in range(size):
        kind = kinds[n % len(kinds)]
        t = rng.randint(0, mk - 1)
        mid = Fraction(2 * t + 1, 2 * mk)
        if kind == "constant":
            shift = (-1, 0, 1)[rng.randint(0, 2)]
            g = PiecewiseFunction.constant(levels[t] + shift * r1)
        elif kind == "ramp":
            slope = V * rng.sign()
            g = PiecewiseFunction.linear(slope, levels[t] - slope * mid)
        else:
            probe = probes[rng.randint(0, len(probes) - 1)].function
            start = rng.randint(0, mk - 1)
            if kind == "tracker":
                xs = [Fraction(2 * s + 1, 2 * mk) for s in range(start, mk)]
            else:
                xs = [x for s in range(start, mk) for x in _flat_segment(cert, s)]
            nodes = _budget_nodes([(x, probe(x)) for x in xs], V)
            g = PiecewiseFunction.interpolant([x for x, _ in nodes], [v for _, v in nodes])
        out.append(Adversary(f"B{n:04d}-{kind}", kind, g))
    return out


def default_battery(cert: ConstructionCertificate, probes, size=200, seed=0) -> list[Adversary]:
    if cert.kind == "bv":
        return bv_battery(cert, probes, size, seed)
    return holder_battery(cert, probes, size, seed)


def check_adversary(cert: ConstructionCertificate, adv: Adversary) -> None:
    if cert.kind == "bv":
        ok = bv_class_check(adv.function, cert.params.V)
    else:
        ok = holder_class_check(adv.function, _battery_alpha(cert.params.alpha), cert.params.K)
    if not ok:
        raise AdversaryError(f"adversary {adv.id} is not in the certificate's class")


# --------------------------------------------------------------------------
# auditing

@dataclass
class AuditRow:
    adversary_id: str
    probe_id: str
    meets: dict            # block -> l_i (only blocks with l_i > 0)
    cover_cost: float
    bound_ok: bool
    cost_ok: bool
    empirical: bool = False

    @property
    def total(self) -> int:
        return sum(self.meets.values())

    @property
    def max_meets(self) -> int:
        return max(self.meets.values(), default=0)

    @property
    def ok(self) -> bool:
        return self.bound_ok and self.cost_ok


@dataclass
class AuditReport:
    kind: str
    rows: list[AuditRow]
    bound: float
    exact: bool

    @property
    def violations(self) -> list[AuditRow]:
        return [r for r in self.rows if not r.ok]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["adversary_id", "probe_id", "block", "l_i", "cover_cost"])
        for r in self.rows:
            for block in sorted(r.meets):
                w.writerow([r.adversary_id, r.probe_id, block, r.meets[block], f"{r.cover_cost:.12g}"])
            w.writerow([r.adversary_id, r.probe_id, "*", r.total, f"{r.cover_cost:.12g}"])
        return buf.getvalue()


def _system_cost(cert: ConstructionCertificate) -> float:
    d = float(cert.exponent)
    return math.fsum(float(b - a) ** d for a, b in cert.system.intervals)


def _outside_system(cert: ConstructionCertificate, comps) -> list[tuple]:
    segs = _complement(cert)
    starts = [a for a, _ in segs]
    fstarts = np.array([float(a) for a in starts])
    out = []
    for a, b in comps:
        i = max(0, _bisect_right(starts, fstarts, a) - 1)
        while i < len(segs) and segs[i][0] <= b:
            u, v = segs[i]
            lo, hi = max(a, u), min(b, v)
            if lo <= hi:
                out.append((lo, hi))
            i += 1
    return out


_COMPLEMENTS: dict[int, list] = {}


def _complement(cert):
    key = id(cert.system)
    if key not in _COMPLEMENTS:
        _COMPLEMENTS.clear()
        _COMPLEMENTS[key] = (cert.system, cert.system.complement())
    return _COMPLEMENTS[key][1]


def _meets_and_cost(cert, pieces, sys_cost):
    mk, k = cert.plan.steps, cert.plan.k
    per_block = defaultdict(set)
    for a, b in pieces:
        t = math.floor(a * mk)
        if not (Fraction(t, mk) < a and b < Fraction(t + 1, mk)):
            raise AssertionError(f"agreement piece [{a}, {b}] touches a step point")
        per_block[t // k].add(t % k)
    d = float(cert.exponent)
    if pieces:
        rest, _ = optimal_interval_cover([(float(a), float(b)) for a, b in pieces], d, check_d=False)
    else:
        rest = 0.0
    return {i: len(js) for i, js in per_block.items()}, sys_cost + float(rest)


def audit_pair(cert: ConstructionCertificate, probe: Probe, adv: Adversary,
               index: Optional[ProbeIndex] = None, sys_cost: Optional[float] = None) -> AuditRow:
    comps = agreement_set(probe.function, adv.function, index)
    pieces = _outside_system(cert, comps)
    if sys_cost is None:
        sys_cost = _system_cost(cert)
    meets, cost = _meets_and_cost(cert, pieces, sys_cost)
    if cert.kind == "bv":
        bound_ok = sum(meets.values()) <= cert.params.count_bound(cert.plan.m, cert.plan.k)
    else:
        bound_ok = max(meets.values(), default=0) <= 1
    cost_ok = cost < 1 / cert.params.M
    return AuditRow(adv.id, probe.id, meets, cost, bound_ok, cost_ok)


def _audit_chunk(args):
    cert, probes, advs = args
    sys_cost = _system_cost(cert)
    idx = {p.id: ProbeIndex(p.function) for p in probes}
    rows = []
    for adv in advs:
        for p in probes:
            rows.append(audit_pair(cert, p, adv, idx[p.id], sys_cost))
    return rows


def empirical_agreement_audit(cert: ConstructionCertificate, battery: Sequence[Adversary],
                              probes: Optional[Sequence[Probe]] = None, jobs: int = 1) -> AuditReport:
    """Audit every (adversary, probe) pair; adversaries are class-checked first."""
    if probes is None:
        probes = standard_probes(cert)
    for adv in battery:
        check_adversary(cert, adv)
    battery = list(battery)
    if jobs > 1 and len(battery) > 1:
        chunks = [battery[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_audit_chunk, [(cert, list(probes), c) for c in chunks]))
        rows = [r for part in parts for r in part]
    else:
        rows = _audit_chunk((cert, list(probes), battery))
    rows.sort(key=lambda r: (r.adversary_id, r.probe_id))
    if cert.kind == "bv":
        bound = float(cert.params.count_bound(cert.plan.m, cert.plan.k))
    else:
        bound = 1.0
    return AuditReport(cert.kind, rows, bound, cert.exact)


def audit_sampled(cert: ConstructionCertificate, g: SampledFunction, probe: Probe,
                  tolerance: float, adversary_id: str = "sampled") -> AuditRow:
    """Float audit: grid cells where ``|f - g| <= tolerance`` outside the system.

    Reported as empirical; nothing here is asserted.
    """
    xs = g.grid
    fv = np.array([float(probe.function(Fraction(float(x)))) for x in xs])
    close = np.abs(fv - g.values) <= tolerance
    mk, k = cert.plan.steps, cert.plan.k
    inside = np.array([cert.system.contains(Fraction(float(x))) for x in xs])
    idx = np.nonzero(close & ~inside)[0]
    per_block = defaultdict(set)
    for i in idx:
        t = min(int(math.floor(xs[i] * mk)), mk - 1)
        per_block[t // k].add(t % k)
    n_cells = len(xs) - 1
    cells = GridSubset(Fraction(1, n_cells), tuple(sorted({min(int(i), n_cells - 1) for i in idx})))
    d = float(cert.exponent)
    rest = optimal_interval_cover([(float(a), float(b)) for a, b in cells.runs()], d, check_d=False)[0]
    cost = _system_cost(cert) + float(rest)
    meets = {i: len(js) for i, js in per_block.items()}
    if cert.kind == "bv":
        bound_ok = sum(meets.values()) <= cert.params.count_bound(cert.plan.m, cert.plan.k)
    else:
        bound_ok = max(meets.values(), default=0) <= 1
    return AuditRow(adversary_id, probe.id, meets, cost, bound_ok, cost < 1 / cert.params.M, True)
