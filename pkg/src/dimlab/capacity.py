"""Hausdorff capacity of finite unions of intervals, and box-counting dimension.

Optimal covers.  Let ``A`` be a finite union of disjoint closed intervals
(runs) ``R_1 < ... < R_r`` and ``0 < d <= 1``.  Any finite cover of ``A`` by
intervals can be replaced by the connected components of its union, which
costs no more because ``(a + b)**d <= a**d + b**d``.  Each component may then
be shrunk to the convex hull of the runs it meets, and every run lies inside a
single component.  So some optimal cover consists of hulls of consecutive
blocks of runs, and ``optimal_cover`` only has to choose where blocks break:

    best[j] = min_{i <= j} best[i - 1] + (right(R_j) - left(R_i)) ** d

which is an O(r^2) dynamic program.  Compact sets attain the infimum over
countable covers in the limit of finite ones, so this is the capacity itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .exact import as_fraction, format_fraction, pow_bounds

__all__ = [
    "ParameterError",
    "ResolutionError",
    "GridSubset",
    "IntervalCover",
    "DimensionEstimate",
    "cover_cost",
    "cover_cost_bounds",
    "optimal_cover",
    "optimal_interval_cover",
    "brute_force_cover_cost",
    "box_count",
    "estimate_dimension",
    "cantor_cells",
    "parse_scales",
]

EXACT_DPS = 60


class ParameterError(ValueError):
    pass


class ResolutionError(ValueError):
    pass


def _check_exponent(d) -> None:
    if not d > 0:
        raise ParameterError(f"exponent d must be positive, got {d}")
    if d > 1:
        raise ParameterError(f"exponent d must be at most 1, got {d}")


@dataclass(frozen=True)
class GridSubset:
    """Union of closed cells ``[i*delta, (i+1)*delta] ∩ [0, 1]``."""

    resolution: Fraction
    cells: tuple[int, ...]

    def __post_init__(self):
        res = as_fraction(self.resolution)
        if res <= 0:
            raise ParameterError("resolution must be positive")
        cells = tuple(int(c) for c in self.cells)
        if any(c < 0 for c in cells):
            raise ValueError("cell indices must be non-negative")
        if any(a >= b for a, b in zip(cells, cells[1:])):
            raise ValueError("cell indices must be sorted and distinct")
        if cells and (cells[-1] + 1) * res > 1 + res:
            raise ValueError("cells extend beyond [0, 1]")
        object.__setattr__(self, "resolution", res)
        object.__setattr__(self, "cells", cells)

    @classmethod
    def full(cls, n_cells: int) -> "GridSubset":
        return cls(Fraction(1, n_cells), tuple(range(n_cells)))

    def __len__(self):
        return len(self.cells)

    def runs(self) -> list[tuple[Fraction, Fraction]]:
        """Maximal runs of adjacent cells as closed intervals."""
        out = []
        res = self.resolution
        start = prev = None
        for c in self.cells:
            if start is None:
                start = prev = c
            elif c == prev + 1:
                prev = c
            else:
                out.append((start * res, min((prev + 1) * res, Fraction(1))))
                start = prev = c
        if start is not None:
            out.append((start * res, min((prev + 1) * res, Fraction(1))))
        return out

    def measure(self) -> Fraction:
        return sum((b - a for a, b in self.runs()), Fraction(0))

    def __or__(self, other: "GridSubset") -> "GridSubset":
        if self.resolution != other.resolution:
            raise ResolutionError("cannot join subsets at different resolutions")
        return GridSubset(self.resolution, tuple(sorted(set(self.cells) | set(other.cells))))

    def to_json(self) -> dict:
        return {"resolution": format_fraction(self.resolution), "cells": list(self.cells)}

    @classmethod
    def from_json(cls, data: dict) -> "GridSubset":
        return cls(as_fraction(data["resolution"]), tuple(data["cells"]))


@dataclass(frozen=True)
class IntervalCover:
    intervals: tuple[tuple, ...]
    d: Fraction = Fraction(1)

    def __post_init__(self):
        ivs = tuple((a, b) for a, b in self.intervals)
        for a, b in ivs:
            if a > b:
                raise ValueError(f"interval ({a}, {b}) has left > right")
        object.__setattr__(self, "intervals", ivs)

    def covers(self, points_or_intervals: Iterable) -> bool:
        """True if every closed interval (or point) lies inside a single cover interval."""
        for item in points_or_intervals:
            a, b = item if isinstance(item, tuple) else (item, item)
            if not any(l <= a and b <= r for l, r in self.intervals):
                return False
        return True

    def to_json(self) -> dict:
        return {
            "d": format_fraction(as_fraction(self.d)),
            "intervals": [[_fmt(a), _fmt(b)] for a, b in self.intervals],
        }

    @classmethod
    def from_json(cls, data: dict) -> "IntervalCover":
        return cls(tuple((as_fraction(a), as_fraction(b)) for a, b in data["intervals"]),
                   as_fraction(data["d"]))


def _fmt(x):
    return format_fraction(x) if isinstance(x, (Fraction, int)) else float(x)


def cover_cost(cover: IntervalCover, d=None):
    """``sum |I|**d``.  Returns a Fraction when every term is rational, else a float."""
    d = cover.d if d is None else d
    if not d > 0:
        raise ParameterError(f"exponent d must be positive, got {d}")
    exact = all(isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction))
                for a, b in cover.intervals) and isinstance(d, (int, Fraction))
    if exact:
        total = Fraction(0)
        for a, b in cover.intervals:
            lo, hi = pow_bounds(b - a, d)
            if lo != hi:
                break
            total += lo
        else:
            return total
    return math.fsum(float(b - a) ** float(d) for a, b in cover.intervals)


def cover_cost_bounds(cover: IntervalCover, d=None, bits: int = 64) -> tuple[Fraction, Fraction]:
    """Rational enclosure of ``cover_cost`` for rational intervals."""
    d = as_fraction(cover.d if d is None else d)
    lo = hi = Fraction(0)
    for a, b in cover.intervals:
        l, h = pow_bounds(as_fraction(b) - as_fraction(a), d, bits)
        lo += l
        hi += h
    return lo, hi


def _power(exact: bool):
    if exact:
        def p(length, d):
            length = as_fraction(length)
            if length == 0:
                return mpmath.mpf(0)
            with mpmath.workdps(EXACT_DPS):
                base = mpmath.mpf(length.numerator) / length.denominator
                dd = as_fraction(d)
                return mpmath.power(base, mpmath.mpf(dd.numerator) / dd.denominator)
        return p
    return lambda length, d: float(length) ** float(d) if length else 0.0


def optimal_interval_cover(intervals: Sequence[tuple], d, exact: bool = False, check_d: bool = True):
    """Minimal ``sum |I|**d`` over covers of a union of sorted disjoint closed intervals.

    With ``exact=True`` lengths are rationals and costs are evaluated with
    mpmath at ``EXACT_DPS`` digits.  ``check_d=False`` admits ``d > 1``, where
    the result is still a valid cover but no longer guaranteed optimal.
    """
    if check_d:
        _check_exponent(d)
    elif not d > 0:
        raise ParameterError(f"exponent d must be positive, got {d}")
    runs = list(intervals)
    for (a, b), (c, _) in zip(runs, runs[1:]):
        if not b < c:
            raise ValueError("intervals must be sorted and pairwise disjoint")
    power = _power(exact)
    r = len(runs)
    if r == 0:
        return (mpmath.mpf(0) if exact else 0.0), IntervalCover((), d)
    with mpmath.workdps(EXACT_DPS):
        best = [None] * (r + 1)
        choice = [0] * (r + 1)
        best[0] = power(0, d)
        for j in range(1, r + 1):
            right = runs[j - 1][1]
            cand_best, cand_i = None, 0
            for i in range(1, j + 1):
                c = best[i - 1] + power(right - runs[i - 1][0], d)
                if cand_best is None or c < cand_best:
                    cand_best, cand_i = c, i
            best[j], choice[j] = cand_best, cand_i
        blocks = []
        j = r
        while j > 0:
            i = choice[j]
            blocks.append((runs[i - 1][0], runs[j - 1][1]))
            j = i - 1
        blocks.reverse()
        return best[r], IntervalCover(tuple(blocks), d)


def optimal_cover(cells: GridSubset, d, exact: bool = False):
    """Capacity ``H^d_inf`` of a cell union with an optimal witness cover."""
    _check_exponent(d)
    return optimal_interval_cover(cells.runs(), d, exact=exact)


def brute_force_cover_cost(cells: GridSubset, d, exact: bool = False):
    """Minimum over every partition of the run sequence into consecutive blocks.

    Enumerates all ``2**(r-1)`` cut patterns; for testing only.
    """
    _check_exponent(d)
    runs = cells.runs()
    power = _power(exact)
    r = len(runs)
    if r == 0:
        return mpmath.mpf(0) if exact else 0.0
    best = None
    with mpmath.workdps(EXACT_DPS):
        for mask in range(1 << (r - 1)):
            total = power(0, d)
            start = 0
            for pos in range(r):
                if pos == r - 1 or mask >> pos & 1:
                    total += power(runs[pos][1] - runs[start][0], d)
                    start = pos + 1
            if best is None or total < best:
                best = total
    return best


def box_count(cells: GridSubset, scale) -> int:
    """Number of boxes ``[j*s, (j+1)*s)`` meeting the cell union.

    A box counts when it meets a run in a set of positive length; a run that
    is a single point (the degenerate cell at 1) counts its own box.
    """
    s = as_fraction(scale)
    if s < cells.resolution:
        raise ResolutionError(f"scale {s} is finer than the resolution {cells.resolution}")
    n_boxes = math.ceil(1 / s)
    spans = []
    for a, b in cells.runs():
        if a == b:
            j = min(math.floor(a / s), n_boxes - 1)
            spans.append((j, j))
        else:
            spans.append((math.floor(a / s), min(math.ceil(b / s) - 1, n_boxes - 1)))
    count = 0
    last = -1
    for lo, hi in spans:
        lo = max(lo, last + 1)
        if hi >= lo:
            count += hi - lo + 1
            last = hi
    return count


@dataclass(frozen=True)
class DimensionEstimate:
    scales: tuple
    counts: tuple
    slope: float
    residual: float
    intercept: float = 0.0
    estimator: str = "box-counting (Minkowski); upper bound for Hausdorff dimension"

    def to_json(self) -> dict:
        return {
            "estimator": self.estimator,
            "scales": [_fmt(s) for s in self.scales],
            "counts": list(self.counts),
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
        }

    @classmethod
    def from_json(cls, data: dict) -> "DimensionEstimate":
        return cls(
            tuple(as_fraction(s) if isinstance(s, str) else s for s in data["scales"]),
            tuple(data["counts"]),
            float(data["slope"]),
            float(data["residual"]),
            float(data.get("intercept", 0.0)),
            data.get("estimator", cls.estimator),
        )

    def csv_rows(self) -> list[tuple[float, int]]:
        return [(float(s), c) for s, c in zip(self.scales, self.counts)]


def estimate_dimension(cells: GridSubset, scales: Sequence) -> DimensionEstimate:
    """Least-squares slope of ``log N(s)`` against ``log(1/s)``."""
    scales = sorted({as_fraction(s) for s in scales}, reverse=True)
    if len(scales) < 3:
        raise ParameterError("need at least three distinct scales")
    if not cells.cells:
        raise ParameterError("cannot estimate the dimension of an empty set")
    counts = [box_count(cells, s) for s in scales]
    x = np.log([1 / float(s) for s in scales])
    y = np.log(np.asarray(counts, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return DimensionEstimate(
        tuple(scales), tuple(counts), float(slope), float(np.sqrt(np.mean(resid ** 2))),
        float(intercept),
    )


def cantor_cells(depth: int) -> GridSubset:
    """Depth-``depth`` middle-thirds Cantor approximation at resolution ``3**-depth``."""
    cells = [0]
    for level in range(depth):
        step = 3 ** (depth - level - 1)
        cells = [c + digit * step for c in cells for digit in (0, 2)]
    return GridSubset(Fraction(1, 3 ** depth), tuple(sorted(cells)))


def parse_scales(text: str) -> list[Fraction]:
    """``"2^-4..2^-12"`` (inclusive power range) or a comma list of rationals."""
    text = text.strip()
    if ".." in text:
        lo, hi = (t.strip() for t in text.split("..", 1))
        b1, e1 = _parse_power(lo)
        b2, e2 = _parse_power(hi)
        if b1 != b2:
            raise ParameterError("scale range endpoints must share a base")
        step = 1 if e2 >= e1 else -1
        return [Fraction(b1) ** e for e in range(e1, e2 + step, step)]
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if "^" in tok:
            b, e = _parse_power(tok)
            out.append(Fraction(b) ** e)
        else:
            out.append(as_fraction(tok))
    return out


def _parse_power(tok: str) -> tuple[int, int]:
    try:
        base, exp = tok.split("^")
        return int(base), int(exp)
    except ValueError as exc:
        raise ParameterError(f"cannot parse scale {tok!r}; expected base^exponent") from exc
