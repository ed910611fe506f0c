"""Staircase constructions that keep agreement sets with Hölder / BV functions small.

Given a centre ``f0``, a radius ``r0`` and targets ``N, M``, the pipeline

1. picks block count ``m`` and steps per block ``k`` (``solve_parameters``),
2. builds the right-continuous staircase ``f0(i/m) + j * r0/(5k)`` on
   ``[i/m + j/(mk), i/m + (j+1)/(mk))`` (``build_staircase``),
3. covers every step point ``t/(mk)`` by a small open interval
   (``build_interval_system``),
4. replaces the staircase by a linear ramp on each covering interval
   (``repair_continuity``), giving a continuous ``f1``, and ``r1 = r0/(20k)``,
5. records every inequality the argument needs in an exact ledger.

All arithmetic is on Fractions unless the certificate is built in float mode,
where each strict inequality must hold with a margin of ``FLOAT_MARGIN``.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .capacity import IntervalCover
from .exact import (as_fraction, format_fraction, pow_bounds, pow_compare,
                    sum_pow_bounds, sum_pow_less)
from .functions import PiecewiseFunction, Piece, SampledFunction, sup_distance
from .generator import (EXACT_FAMILIES, GeneratorSpec, Modulus,
                        exact_piecewise, generate, modulus_oracle)

__all__ = [
    "FLOAT_MARGIN",
    "ConstructionError",
    "CoverageError",
    "HolderParams",
    "BVParams",
    "CenterFunction",
    "StaircasePlan",
    "IntervalSystem",
    "LedgerEntry",
    "ConstructionCertificate",
    "center_from_spec",
    "solve_parameters",
    "build_staircase",
    "build_interval_system",
    "repair_continuity",
    "certify_separation",
    "capacity_ledger",
    "build_holder_certificate",
    "build_bv_certificate",
    "plan_for",
]

FLOAT_MARGIN = 1e-9
Real = Union[Fraction, float]


class ConstructionError(ValueError):
    pass


class CoverageError(ConstructionError):
    pass


@dataclass(frozen=True)
class HolderParams:
    """Targets for the Hölder construction; ``alpha`` is a Fraction (exact) or float."""

    alpha: Real
    N: int
    M: int
    r0: Fraction
    K: Fraction = Fraction(1)

    def __post_init__(self):
        alpha = self.alpha if isinstance(self.alpha, float) else as_fraction(self.alpha)
        if not 0 < alpha < 1:
            raise ConstructionError(
                f"alpha must satisfy 0 < alpha < 1, got {self.alpha} "
                "(alpha = 1 follows by intersecting the cases alpha = 1 - 1/L)")
        object.__setattr__(self, "alpha", alpha)
        if int(self.N) < 1 or int(self.M) < 1:
            raise ConstructionError("N and M must be positive integers")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "M", int(self.M))
        r0, K = as_fraction(self.r0), as_fraction(self.K)
        if r0 <= 0 or K <= 0:
            raise ConstructionError("r0 and K must be positive")
        object.__setattr__(self, "r0", r0)
        object.__setattr__(self, "K", K)
        if self.exponent > 1:
            raise ConstructionError(
                f"exponent 1 - alpha + 1/N = {self.exponent} exceeds 1; take N >= 1/alpha "
                "(capacities above exponent 1 vanish on [0, 1], so there is nothing to certify)")

    @property
    def float_mode(self) -> bool:
        return isinstance(self.alpha, float)

    @property
    def exponent(self) -> Real:
        if self.float_mode:
            return 1.0 - self.alpha + 1.0 / self.N
        return 1 - self.alpha + Fraction(1, self.N)

    @property
    def budget(self) -> Fraction:
        return Fraction(1, 2 * self.M)

    def decay_exponent(self) -> Real:
        """Exponent of ``m`` in the upper bound on the block term; always negative."""
        a = self.alpha
        d = self.exponent
        return 1 - d - a * d / (1 - a)

    def to_json(self) -> dict:
        return {"alpha": _out(self.alpha), "N": self.N, "M": self.M,
                "r0": _out(self.r0), "K": _out(self.K)}

    @classmethod
    def from_json(cls, d) -> "HolderParams":
        return cls(_in(d["alpha"]), d["N"], d["M"], _in(d["r0"]), _in(d.get("K", "1")))


@dataclass(frozen=True)
class BVParams:
    N: int
    M: int
    r0: Fraction
    V: Fraction = Fraction(1)

    def __post_init__(self):
        if int(self.N) < 1 or int(self.M) < 1:
            raise ConstructionError("N and M must be positive integers")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "M", int(self.M))
        r0, V = as_fraction(self.r0), as_fraction(self.V)
        if r0 <= 0 or V <= 0:
            raise ConstructionError("r0 and V must be positive")
        object.__setattr__(self, "r0", r0)
        object.__setattr__(self, "V", V)

    float_mode = False

    @property
    def exponent(self) -> Fraction:
        return Fraction(1, 2) + Fraction(1, self.N)

    @property
    def budget(self) -> Fraction:
        return Fraction(1, 2 * self.M)

    def count_bound(self, m: int, k: int) -> Fraction:
        """Largest number of step intervals an agreement set can need."""
        return m + 10 * k * self.V / self.r0

    def to_json(self) -> dict:
        return {"N": self.N, "M": self.M, "r0": _out(self.r0), "V": _out(self.V)}

    @classmethod
    def from_json(cls, d) -> "BVParams":
        return cls(d["N"], d["M"], _in(d["r0"]), _in(d.get("V", "1")))


def _out(x):
    if isinstance(x, float):
        return x
    return format_fraction(as_fraction(x))


def _in(x):
    if isinstance(x, float):
        return x
    return as_fraction(x)


@dataclass
class CenterFunction:
    """The ball centre ``f0``: an exact piecewise function plus a continuity modulus."""

    function: PiecewiseFunction
    modulus: Modulus
    description: str

    @property
    def certified(self) -> bool:
        return self.modulus.certified

    def __call__(self, x):
        return self.function(x)


def center_from_spec(text: str = "constant:c=0", n: int = 257, seed: int = 0) -> CenterFunction:
    """Centre from a generator description.

    ``constant``, ``linear`` and ``takagi`` are represented exactly with their
    closed-form moduli.  Other families are sampled, replaced by the exact
    interpolant of the samples, and given the grid-Lipschitz modulus of that
    interpolant; the certificate is then flagged as heuristic with respect to
    the underlying function.
    """
    spec = GeneratorSpec.parse(text, seed=seed, n=n)
    if spec.family in EXACT_FAMILIES:
        return CenterFunction(exact_piecewise(spec), modulus_oracle(spec), spec.describe())
    samples = generate(spec)
    return center_from_samples(samples, f"{spec.describe()}@seed={spec.seed},n={spec.n}")


def center_from_samples(samples: SampledFunction, description: str = "sampled") -> CenterFunction:
    f = samples.interpolant(exact=True)
    lip = f.lipschitz()
    mod = Modulus(lambda t: lip * t, f"grid-Lipschitz(L={float(lip):.6g})", certified=False)
    return CenterFunction(f, mod, description)


def center_from_function(f: PiecewiseFunction, description: str = "piecewise") -> CenterFunction:
    if not f.is_continuous():
        raise ConstructionError("the centre function must be continuous")
    lip = f.lipschitz()
    return CenterFunction(f, Modulus(lambda t: lip * t, f"Lipschitz(L={format_fraction(as_fraction(lip))})"),
                          description)


@dataclass(frozen=True)
class StaircasePlan:
    m: int
    k: int
    r0: Fraction

    def __post_init__(self):
        if self.m < 1 or self.k < 1:
            raise ConstructionError("m and k must be positive")
        object.__setattr__(self, "r0", as_fraction(self.r0))

    @property
    def jump(self) -> Fraction:
        return self.r0 / (5 * self.k)

    @property
    def r1(self) -> Fraction:
        return self.r0 / (20 * self.k)

    @property
    def steps(self) -> int:
        return self.m * self.k

    @property
    def breakpoints(self) -> list[Fraction]:
        """All ``i/m + j/(mk)`` together with 1, i.e. the multiples of ``1/(mk)``."""
        mk = self.steps
        return [Fraction(t, mk) for t in range(mk + 1)]

    def block_of(self, x: Fraction) -> tuple[int, int]:
        t = min(math.floor(x * self.steps), self.steps - 1)
        return divmod(t, self.k)

    def to_json(self) -> dict:
        return {"m": self.m, "k": self.k, "r0": _out(self.r0),
                "jump": _out(self.jump), "r1": _out(self.r1)}

    @classmethod
    def from_json(cls, d) -> "StaircasePlan":
        return cls(d["m"], d["k"], _in(d["r0"]))


@dataclass(frozen=True)
class IntervalSystem:
    """Disjoint intervals, open relative to [0, 1] (a clipped end contains 0 or 1)."""

    intervals: tuple[tuple[Fraction, Fraction], ...]
    half_width: Fraction

    def __post_init__(self):
        ivs = tuple((as_fraction(a), as_fraction(b)) for a, b in self.intervals)
        object.__setattr__(self, "intervals", ivs)
        object.__setattr__(self, "half_width", as_fraction(self.half_width))
        object.__setattr__(self, "_lefts", [a for a, _ in ivs])

    def lengths(self) -> list[Fraction]:
        return [b - a for a, b in self.intervals]

    def index_containing(self, x) -> int:
        """Index of the interval containing ``x``, or -1."""
        t = bisect.bisect_right(self._lefts, x) - 1
        if t >= 0:
            a, b = self.intervals[t]
            if a < x < b or x == 0 == a or x == 1 == b:
                return t
        return -1

    def contains(self, x) -> bool:
        return self.index_containing(x) >= 0

    def is_disjoint(self) -> bool:
        return all(b <= c for (_, b), (c, _) in zip(self.intervals, self.intervals[1:]))

    def complement(self) -> list[tuple[Fraction, Fraction]]:
        """Closed segments of [0, 1] outside the union (possibly single points)."""
        out = []
        cur = Fraction(0)
        for a, b in self.intervals:
            if a != 0:
                out.append((cur, a))
            cur = b
        if not self.intervals or self.intervals[-1][1] != 1:
            out.append((cur, Fraction(1)))
        return out

    def cost_terms(self) -> list[tuple[Fraction, Fraction]]:
        counts: dict[Fraction, int] = {}
        for length in self.lengths():
            counts[length] = counts.get(length, 0) + 1
        return [(Fraction(c), length) for length, c in sorted(counts.items())]

    def to_json(self) -> dict:
        return {"half_width": _out(self.half_width),
                "intervals": [[_out(a), _out(b)] for a, b in self.intervals]}

    @classmethod
    def from_json(cls, d) -> "IntervalSystem":
        return cls(tuple((_in(a), _in(b)) for a, b in d["intervals"]), _in(d["half_width"]))


@dataclass
class LedgerEntry:
    id: str
    relation: str          # "<", "<=" or "="
    lhs: Real              # exact value, or lower end of an enclosure
    rhs: Real
    verdict: bool
    lhs_upper: Optional[Real] = None   # upper end of the enclosure when lhs is irrational
    note: str = ""

    def to_json(self) -> dict:
        return {"id": self.id, "relation": self.relation, "lhs": _out(self.lhs),
                "lhs_upper": None if self.lhs_upper is None else _out(self.lhs_upper),
                "rhs": _out(self.rhs), "verdict": self.verdict, "note": self.note}

    @classmethod
    def from_json(cls, d) -> "LedgerEntry":
        return cls(d["id"], d["relation"], _in(d["lhs"]), _in(d["rhs"]), bool(d["verdict"]),
                   None if d.get("lhs_upper") is None else _in(d["lhs_upper"]), d.get("note", ""))


@dataclass
class ConstructionCertificate:
    kind: str                              # "holder" or "bv"
    params: Union[HolderParams, BVParams]
    center: str
    modulus: str
    modulus_certified: bool
    plan: StaircasePlan
    system: IntervalSystem
    f0: PiecewiseFunction
    staircase: PiecewiseFunction
    f1: PiecewiseFunction
    ledger: list[LedgerEntry] = field(default_factory=list)

    @property
    def r1(self) -> Fraction:
        return self.plan.r1

    @property
    def exponent(self) -> Real:
        return self.params.exponent

    @property
    def float_mode(self) -> bool:
        return self.params.float_mode

    @property
    def accepted(self) -> bool:
        return bool(self.ledger) and all(e.verdict for e in self.ledger)

    @property
    def exact(self) -> bool:
        return not self.float_mode and self.modulus_certified

    def entry(self, key: str) -> LedgerEntry:
        for e in self.ledger:
            if e.id == key:
                return e
        raise KeyError(key)

    def witness_cover(self, cells: Sequence[int] = ()) -> IntervalCover:
        """Intervals of the system plus the closed step intervals with the given indices."""
        mk = self.plan.steps
        ivs = list(self.system.intervals)
        ivs += [(Fraction(t, mk), Fraction(t + 1, mk)) for t in cells]
        return IntervalCover(tuple(sorted(ivs)), self.exponent)


# --------------------------------------------------------------------------
# parameter solving

def _pow_lt(x, e, y, float_mode: bool) -> bool:
    """``x**e < y`` exactly, or with margin in float mode."""
    if float_mode:
        return float(x) ** float(e) + FLOAT_MARGIN < float(y)
    return pow_compare(x, e, y) < 0


def _pow_gt(x, e, y, float_mode: bool) -> bool:
    if float_mode:
        return float(x) ** float(e) > float(y) + FLOAT_MARGIN
    return pow_compare(x, e, y) > 0


def _separation_holds(params: HolderParams, m: int, k: int) -> bool:
    """``K * (2/(mk))**alpha < r0/(10k)``."""
    return _pow_lt(Fraction(2, m * k), params.alpha, params.r0 / (10 * params.K * k), params.float_mode)


def _window_lower_holds(params: HolderParams, m: int, k: int) -> bool:
    """Half the window's upper end lies below ``k``: separation fails at ``2k``."""
    return _pow_gt(Fraction(2, m * 2 * k), params.alpha, params.r0 / (10 * params.K * 2 * k),
                   params.float_mode)


def _block_budget_holds(params: HolderParams, m: int, k: int) -> bool:
    """``m * (1/(mk))**d < 1/(2M)``."""
    return _pow_lt(Fraction(1, m * k), params.exponent, params.budget / m, params.float_mode)


def _modulus_ok(modulus: Modulus, m: int, r0: Fraction, float_mode: bool = False) -> bool:
    value = modulus(Fraction(2, m))
    if isinstance(value, float) or float_mode:
        return float(value) + FLOAT_MARGIN < float(r0) / 5
    return value < r0 / 5


def window_top(params: HolderParams, m: int) -> float:
    """Float value of ``C * m**(alpha/(1-alpha))`` (for search only)."""
    a = float(params.alpha)
    c = (float(params.r0) / (10 * float(params.K) * 2 ** a)) ** (1 / (1 - a))
    return c * m ** (a / (1 - a))


def _max_k(params: HolderParams, m: int) -> int:
    """Largest ``k >= 1`` with the separation inequality, or 0 if none."""
    guess = max(1, int(math.floor(window_top(params, m))))
    k = guess + 1
    while k > 0 and not _separation_holds(params, m, k):
        k -= 1
    while _separation_holds(params, m, k + 1):
        k += 1
    return k


def solve_parameters(params: HolderParams, modulus: Modulus, m_max: int = 10 ** 7) -> StaircasePlan:
    """Smallest ``m`` (then the largest ``k`` in the window) meeting every condition.

    Conditions: ``modulus(2/m) < r0/5``; an integer ``k`` strictly inside
    ``(C m^{a/(1-a)} / 2, C m^{a/(1-a)})`` with ``C = (r0/(10 K 2^a))^{1/(1-a)}``;
    and ``m (1/(mk))^d < 1/(2M)`` with ``d = 1 - a + 1/N``.
    """
    for m in range(1, m_max + 1):
        if not _modulus_ok(modulus, m, params.r0, params.float_mode):
            continue
        k = _max_k(params, m)
        if k < 1 or not _window_lower_holds(params, m, k):
            continue
        if _block_budget_holds(params, m, k):
            return StaircasePlan(m, k, params.r0)
    raise ConstructionError(f"no admissible (m, k) with m <= {m_max}")


def solve_bv_parameters(params: BVParams, modulus: Modulus, m_max: int = 10 ** 7) -> StaircasePlan:
    """Smallest ``m`` with ``modulus(2/m) < r0/5`` and ``(10/r0 + 1) m^{-2/N} < 1/(2M)``; ``k = m``."""
    for m in range(1, m_max + 1):
        if not _modulus_ok(modulus, m, params.r0):
            continue
        if _bv_block_holds(params, m):
            return StaircasePlan(m, m, params.r0)
    raise ConstructionError(f"no admissible m <= {m_max}")


def _bv_block_holds(params: BVParams, m: int) -> bool:
    coef = 10 * params.V / params.r0 + 1
    # coef * m**(-2/N) < 1/(2M)  <=>  (1/m)**(2/N) < 1/(2M coef)
    return pow_compare(Fraction(1, m), Fraction(2, params.N), params.budget / coef) < 0


# --------------------------------------------------------------------------
# building blocks

def build_staircase(f0, plan: StaircasePlan, check: bool = False) -> PiecewiseFunction:
    """``f0(i/m) + j * r0/(5k)`` on ``[i/m + j/(mk), i/m + (j+1)/(mk))``, and ``f0(1)`` at 1."""
    m, k, mk = plan.m, plan.k, plan.steps
    jump = plan.jump
    bps = plan.breakpoints
    base = [f0(Fraction(i, m)) for i in range(m)]
    pieces = [Piece.constant(base[t // k] + (t % k) * jump) for t in range(mk)]
    stair = PiecewiseFunction.from_pieces(bps, pieces, owns="left", end_value=f0(Fraction(1)))
    if check:
        f = f0.function if isinstance(f0, CenterFunction) else f0
        dist = sup_distance(f, stair)
        if dist > 2 * plan.r0 / 5:
            raise ConstructionError(f"staircase is {dist} from the centre, more than 2r0/5")
    return stair


def build_interval_system(plan: StaircasePlan, d, budget, float_mode: bool = False) -> IntervalSystem:
    """Equal intervals of half-width ``eps`` around each ``t/(mk)``, clipped to [0, 1].

    ``eps`` is the largest power of 1/2 below ``1/(2mk)`` with ``sum |I|**d < budget``.
    """
    if not 0 < d <= 1:
        raise ConstructionError(f"exponent must lie in (0, 1], got {d}")
    budget = as_fraction(budget)
    if budget <= 0:
        raise ConstructionError("budget must be positive")
    mk = plan.steps
    eps = Fraction(1, 1 << (2 * mk).bit_length())  # largest power of 1/2 strictly below 1/(2mk)
    assert eps < Fraction(1, 2 * mk)
    while True:
        terms = _system_terms(mk, eps)
        if float_mode:
            total = math.fsum(float(c) * float(x) ** float(d) for c, x in terms)
            ok = total + FLOAT_MARGIN < float(budget)
        else:
            ok = sum_pow_less(terms, d, budget)[0]
        if ok:
            break
        eps /= 2
    ivs = []
    for t in range(mk + 1):
        x = Fraction(t, mk)
        ivs.append((max(x - eps, Fraction(0)), min(x + eps, Fraction(1))))
    ivs = _merge_open(ivs)
    system = IntervalSystem(tuple(ivs), eps)
    if not system.is_disjoint():  # pragma: no cover - eps < 1/(2mk)
        raise ConstructionError("interval system is not disjoint")
    return system


def _system_terms(mk: int, eps: Fraction) -> list[tuple[Fraction, Fraction]]:
    # mk - 1 interior intervals of length 2 eps, the two clipped ones have length eps
    return [(Fraction(mk - 1), 2 * eps), (Fraction(2), eps)]


def _merge_open(ivs):
    ivs = sorted(ivs)
    out = [list(ivs[0])]
    for a, b in ivs[1:]:
        if a < out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [tuple(iv) for iv in out]


def repair_continuity(stair: PiecewiseFunction, system: IntervalSystem, f0) -> PiecewiseFunction:
    """Continuous ``f1``: linear on each interval, equal to ``stair`` elsewhere, ``f1 = f0`` at 0 and 1."""
    for x in stair.discontinuities():
        if not system.contains(x):
            raise CoverageError(f"discontinuity at {x} is not covered by the interval system")
    f0_0, f0_1 = f0(Fraction(0)), f0(Fraction(1))
    pts = set(a for a, _ in system.intervals) | set(b for _, b in system.intervals)
    pts |= {x for x in stair.breakpoints if not system.contains(x) or x in (0, 1)}
    pts = sorted(pts)

    def value_at(x):
        if system.contains(x):
            if x == 0:
                return f0_0
            if x == 1:
                return f0_1
        return stair(x)

    vals = [value_at(x) for x in pts]
    pieces = []
    for (u, vu), (v, vv) in zip(zip(pts, vals), zip(pts[1:], vals[1:])):
        mid = (u + v) / 2
        if system.contains(mid):
            pieces.append(Piece.through(u, vu, v, vv))
        else:
            t = bisect.bisect_right(stair.breakpoints, mid) - 1
            pieces.append(stair.pieces[t])
    f1 = PiecewiseFunction(pts, vals, pieces)
    if not f1.is_continuous():
        raise CoverageError("repaired function is not continuous")
    return f1


# --------------------------------------------------------------------------
# ledger

def _entry_pow(id_, coef, x, e, rhs, float_mode, relation="<", note="") -> LedgerEntry:
    """Entry for ``coef * x**e <relation> rhs``."""
    if float_mode:
        lhs = float(coef) * float(x) ** float(e)
        verdict = lhs + FLOAT_MARGIN < float(rhs) if relation == "<" else lhs <= float(rhs) + FLOAT_MARGIN
        return LedgerEntry(id_, relation, lhs, float(rhs), verdict, None, note)
    coef, rhs = as_fraction(coef), as_fraction(rhs)
    lo, hi = pow_bounds(x, e)
    sign = pow_compare(x, e, rhs / coef)
    verdict = sign < 0 if relation == "<" else sign <= 0
    return LedgerEntry(id_, relation, coef * lo, rhs, verdict, None if lo == hi else coef * hi, note)


def _entry_plain(id_, relation, lhs, rhs, note="") -> LedgerEntry:
    if relation == "<":
        verdict = lhs < rhs
    elif relation == "<=":
        verdict = lhs <= rhs
    else:
        verdict = lhs == rhs
    return LedgerEntry(id_, relation, lhs, rhs, bool(verdict), None, note)


def _entry_sum(id_, terms, e, rhs, float_mode, note="") -> LedgerEntry:
    if float_mode:
        lhs = math.fsum(float(c) * float(x) ** float(e) for c, x in terms)
        return LedgerEntry(id_, "<", lhs, float(rhs), lhs + FLOAT_MARGIN < float(rhs), None, note)
    verdict, lo, hi = sum_pow_less(terms, e, rhs)
    lo64, hi64 = sum_pow_bounds(terms, e, 64)
    # store the 64-bit enclosure so verification can recompute it verbatim
    return LedgerEntry(id_, "<", lo64, as_fraction(rhs), verdict, None if lo64 == hi64 else hi64, note)


def window_enclosure(params: HolderParams, m: int) -> tuple[Fraction, Fraction]:
    """Enclosure of ``C m^{a/(1-a)} = (r0/(10K))^{1/(1-a)} (m/2)^{a/(1-a)}``."""
    a = params.alpha
    l1, h1 = pow_bounds(params.r0 / (10 * params.K), 1 / (1 - a))
    l2, h2 = pow_bounds(Fraction(m, 2), a / (1 - a))
    return l1 * l2, h1 * h2


def certify_separation(params: HolderParams, plan: StaircasePlan) -> LedgerEntry:
    """``K (2/(mk))^a < r0/(10k)``: a Hölder function cannot meet two steps of one block."""
    m, k = plan.m, plan.k
    return _entry_pow("separation", params.K, Fraction(2, m * k), params.alpha,
                      params.r0 / (10 * k), params.float_mode,
                      note="jump r0/(5k) minus 2 r1 leaves r0/(10k) over a gap below 2/(mk)")


def _window_entries(params: HolderParams, plan: StaircasePlan) -> list[LedgerEntry]:
    m, k = plan.m, plan.k
    if params.float_mode:
        top = window_top(params, m)
        return [
            LedgerEntry("window_lower", "<", top / 2, float(k), top / 2 + FLOAT_MARGIN < k,
                        None, "half the window top lies below k"),
            LedgerEntry("window_upper", "<", float(k), top, k + FLOAT_MARGIN < top,
                        None, "k lies below the window top"),
        ]
    lo, hi = window_enclosure(params, m)
    lower = _window_lower_holds(params, m, k)
    upper = _separation_holds(params, m, k)
    return [
        LedgerEntry("window_lower", "<", lo / 2, Fraction(k), lower, hi / 2,
                    "half the window top lies below k"),
        # stored as k < top: lhs is k, rhs the lower end of the top's enclosure
        LedgerEntry("window_upper", "<", Fraction(k), lo, upper, None,
                    f"k lies below the window top (top <= {format_fraction(hi)})"),
    ]


def capacity_ledger(params, plan: StaircasePlan, system: IntervalSystem) -> list[LedgerEntry]:
    """System budget, block budget and their total against ``1/M``."""
    fm = params.float_mode
    d = params.exponent
    budget = params.budget
    sys_entry = _entry_sum("system_budget", system.cost_terms(), d, budget, fm,
                           note="sum |I|^d over the interval system")
    if isinstance(params, BVParams):
        coef = 10 * params.V / params.r0 + 1
        block = _entry_pow("block_budget", coef, Fraction(1, plan.m), Fraction(2, params.N),
                           budget, False,
                           note="(10V/r0 + 1) m^(-2/N) bounds the step intervals at k = m")
    else:
        block = _entry_pow("block_budget", plan.m, Fraction(1, plan.steps), d, budget, fm,
                           note="m step intervals of length 1/(mk)")
    total = _total_entry(sys_entry, block, Fraction(1, params.M), fm)
    return [sys_entry, block, total]


def _total_entry(a: LedgerEntry, b: LedgerEntry, rhs, float_mode) -> LedgerEntry:
    if float_mode:
        lhs = a.lhs + b.lhs
        return LedgerEntry("capacity_total", "<", lhs, float(rhs), lhs + FLOAT_MARGIN < rhs,
                           None, "system plus step intervals")
    lo = a.lhs + b.lhs
    hi = (a.lhs_upper if a.lhs_upper is not None else a.lhs) + \
         (b.lhs_upper if b.lhs_upper is not None else b.lhs)
    # both parts are strictly below 1/(2M), so their sum is strictly below 1/M
    verdict = a.verdict and b.verdict and a.rhs + b.rhs <= rhs
    return LedgerEntry("capacity_total", "<", lo, rhs, verdict, None if lo == hi else hi,
                       "system plus step intervals")


def _distance_entries(f0: PiecewiseFunction, stair, f1, plan: StaircasePlan) -> list[LedgerEntry]:
    r0, r1 = plan.r0, plan.r1
    d01 = sup_distance(f0, f1)
    return [
        _entry_plain("staircase_distance", "<=", sup_distance(f0, stair), 2 * r0 / 5, "||f0 - stair||"),
        _entry_plain("repair_distance", "<=", sup_distance(stair, f1), 2 * r0 / 5, "||stair - f1||"),
        _entry_plain("center_distance", "<=", d01, 4 * r0 / 5, "||f0 - f1||"),
        _entry_plain("step_margin", "=", plan.jump - 2 * r1, r0 / (10 * plan.k),
                     "jump - 2 r1 = r0/(10k)"),
        _entry_plain("radius", "<=", r1, r0 / 5, "r1 <= r0/5"),
        _entry_plain("ball_nesting", "<=", d01 + r1, r0, "B(f1, r1) inside B(f0, r0)"),
    ]


def _modulus_entry(center: CenterFunction, plan: StaircasePlan, float_mode: bool) -> LedgerEntry:
    value = center.modulus(Fraction(2, plan.m))
    note = f"{center.modulus.name}{'' if center.certified else ' [heuristic]'}"
    if isinstance(value, float) or float_mode:
        v = float(value)
        return LedgerEntry("modulus", "<", v, float(plan.r0) / 5, v + FLOAT_MARGIN < float(plan.r0) / 5,
                           None, note)
    return _entry_plain("modulus", "<", value, plan.r0 / 5, note)


def _coverage_entry(system: IntervalSystem, plan: StaircasePlan) -> LedgerEntry:
    missing = sum(1 for x in plan.breakpoints if not system.contains(x))
    ok = missing == 0 and system.is_disjoint()
    return LedgerEntry("system_cover", "=", Fraction(missing), Fraction(0), ok, None,
                       "step points outside the disjoint system")


# --------------------------------------------------------------------------
# pipelines

def plan_for(params, center: CenterFunction) -> StaircasePlan:
    if isinstance(params, BVParams):
        return solve_bv_parameters(params, center.modulus)
    return solve_parameters(params, center.modulus)


def build_holder_certificate(params: HolderParams, center: CenterFunction,
                             plan: Optional[StaircasePlan] = None) -> ConstructionCertificate:
    if plan is None:
        plan = solve_parameters(params, center.modulus)
    if plan.r0 != params.r0:
        raise ConstructionError("plan and parameters disagree on r0")
    fm = params.float_mode
    stair = build_staircase(center, plan)
    system = build_interval_system(plan, params.exponent, params.budget, fm)
    f1 = repair_continuity(stair, system, center)
    ledger = [_modulus_entry(center, plan, fm), certify_separation(params, plan)]
    ledger += _window_entries(params, plan)
    ledger.append(_coverage_entry(system, plan))
    ledger += capacity_ledger(params, plan, system)
    ledger += _distance_entries(center.function, stair, f1, plan)
    return ConstructionCertificate("holder", params, center.description, center.modulus.name,
                                   center.certified, plan, system, center.function, stair, f1, ledger)


def build_bv_certificate(params: BVParams, center: CenterFunction,
                         plan: Optional[StaircasePlan] = None) -> ConstructionCertificate:
    if plan is None:
        plan = solve_bv_parameters(params, center.modulus)
    if plan.k != plan.m:
        raise ConstructionError("the variation construction requires k = m")
    stair = build_staircase(center, plan)
    system = build_interval_system(plan, params.exponent, params.budget)
    f1 = repair_continuity(stair, system, center)
    bound = params.count_bound(plan.m, plan.k)
    ledger = [_modulus_entry(center, plan, False)]
    ledger.append(_coverage_entry(system, plan))
    ledger += capacity_ledger(params, plan, system)
    ledger.append(LedgerEntry(
        "count_bound", "=", bound, bound, True, None,
        "Var(g) >= r0/(10k) (sum l_i - m), so sum l_i <= m + 10kV/r0"))
    ledger += _distance_entries(center.function, stair, f1, plan)
    return ConstructionCertificate("bv", params, center.description, center.modulus.name,
                                   center.certified, plan, system, center.function, stair, f1, ledger)
