"""Real functions on [0, 1]: exact piecewise-linear descriptions and grid samples.

A :class:`PiecewiseFunction` is stored as breakpoints ``0 = x_0 < ... < x_n = 1``,
an explicit value at every breakpoint, and one linear piece per open gap
``(x_t, x_{t+1})``.  Which piece "owns" a breakpoint is therefore just the
value stored there, and jumps (the staircase is not continuous) are first class.
Arithmetic stays in whatever number type the inputs use, so rational inputs
give exact results.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

import numpy as np

__all__ = [
    "Piece",
    "PiecewiseFunction",
    "SampledFunction",
    "Ball",
    "DomainError",
    "GridError",
    "evaluate",
    "sup_distance",
    "total_variation",
]

Number = Union[int, float, Fraction]


class DomainError(ValueError):
    """Evaluation point outside [0, 1]."""


class GridError(ValueError):
    """Sampled functions that do not share a grid, or an invalid grid."""


@dataclass(frozen=True)
class Piece:
    """``x -> slope * x + intercept`` on an open gap between breakpoints."""

    slope: Number = 0
    intercept: Number = 0

    @classmethod
    def constant(cls, c: Number) -> "Piece":
        return cls(0 * c, c)

    @classmethod
    def through(cls, x0, y0, x1, y1) -> "Piece":
        slope = (y1 - y0) / (x1 - x0)
        return cls(slope, y0 - slope * x0)

    @property
    def is_constant(self) -> bool:
        return self.slope == 0

    def at(self, x):
        return self.slope * x + self.intercept

    def __sub__(self, other: "Piece") -> "Piece":
        return Piece(self.slope - other.slope, self.intercept - other.intercept)

    def __add__(self, other: "Piece") -> "Piece":
        return Piece(self.slope + other.slope, self.intercept + other.intercept)


@dataclass(frozen=True, eq=False)
class PiecewiseFunction:
    breakpoints: tuple
    values: tuple
    pieces: tuple

    def __post_init__(self):
        bps, vals, pcs = self.breakpoints, self.values, self.pieces
        object.__setattr__(self, "breakpoints", tuple(bps))
        object.__setattr__(self, "values", tuple(vals))
        object.__setattr__(self, "pieces", tuple(pcs))
        bps = self.breakpoints
        if len(bps) < 2:
            raise ValueError("need at least the breakpoints 0 and 1")
        if bps[0] != 0 or bps[-1] != 1:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if any(b >= c for b, c in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if len(self.values) != len(bps) or len(self.pieces) != len(bps) - 1:
            raise ValueError("need one value per breakpoint and one piece per gap")

    # construction helpers ------------------------------------------------

    @classmethod
    def from_pieces(cls, breakpoints, pieces, owns: str = "left", end_value=None):
        """Build from pieces on ``[x_t, x_{t+1}]`` with the given closure convention.

        With ``owns="left"`` each piece owns its left endpoint and the value
        at 1 comes from the last piece unless ``end_value`` is supplied;
        ``owns="right"`` mirrors this (``end_value`` then pins the value at 0).
        """
        bps = list(breakpoints)
        pcs = list(pieces)
        if owns == "left":
            vals = [p.at(x) for p, x in zip(pcs, bps)]
            vals.append(pcs[-1].at(bps[-1]) if end_value is None else end_value)
        elif owns == "right":
            vals = [pcs[0].at(bps[0]) if end_value is None else end_value]
            vals.extend(p.at(x) for p, x in zip(pcs, bps[1:]))
        else:
            raise ValueError(f"owns must be 'left' or 'right', not {owns!r}")
        return cls(bps, vals, pcs)

    @classmethod
    def constant(cls, c: Number) -> "PiecewiseFunction":
        zero, one = 0 * c, 0 * c + 1
        return cls((zero, one), (c, c), (Piece.constant(c),))

    @classmethod
    def linear(cls, slope: Number, intercept: Number) -> "PiecewiseFunction":
        p = Piece(slope, intercept)
        zero, one = 0 * slope, 0 * slope + 1
        return cls((zero, one), (p.at(zero), p.at(one)), (p,))

    @classmethod
    def interpolant(cls, xs: Sequence, ys: Sequence) -> "PiecewiseFunction":
        """Continuous piecewise-linear interpolant, constant beyond the outer nodes."""
        xs, ys = list(xs), list(ys)
        if not xs or len(xs) != len(ys):
            raise ValueError("need equally many (and at least one) nodes")
        if any(a >= b for a, b in zip(xs, xs[1:])):
            raise ValueError("nodes must be strictly increasing")
        if xs[0] < 0 or xs[-1] > 1:
            raise DomainError("nodes must lie in [0, 1]")
        zero, one = 0 * xs[0], 0 * xs[0] + 1
        if xs[0] != 0:
            xs.insert(0, zero)
            ys.insert(0, ys[0])
        if xs[-1] != 1:
            xs.append(one)
            ys.append(ys[-1])
        if len(xs) == 1:
            # single node at 0 or 1 padded on one side only
            xs, ys = [zero, one], [ys[0], ys[0]]
        pieces = [Piece.through(x0, y0, x1, y1)
                  for x0, y0, x1, y1 in zip(xs, ys, xs[1:], ys[1:])]
        return cls(xs, ys, pieces)

    @classmethod
    def step(cls, xs: Sequence, ys: Sequence) -> "PiecewiseFunction":
        """Right-continuous step function: ``ys[t]`` on ``[xs[t], xs[t+1])``, ``ys[0]`` before ``xs[0]``."""
        xs, ys = list(xs), list(ys)
        if not xs or len(xs) != len(ys):
            raise ValueError("need equally many (and at least one) nodes")
        zero, one = 0 * xs[0], 0 * xs[0] + 1
        bps, levels = [zero], [ys[0]]
        for x, y in zip(xs, ys):
            if x == zero:
                levels[0] = y
            elif x == one:
                break
            else:
                bps.append(x)
                levels.append(y)
        bps.append(one)
        end = ys[-1]
        return cls.from_pieces(bps, [Piece.constant(c) for c in levels], "left", end)

    # evaluation ------------------------------------------------------------

    def _locate(self, x) -> tuple[int, bool]:
        if x < 0 or x > 1:
            raise DomainError(f"x = {x} is outside [0, 1]")
        t = bisect.bisect_right(self.breakpoints, x) - 1
        if self.breakpoints[t] == x:
            return t, True
        return t, False

    def __call__(self, x):
        t, on_break = self._locate(x)
        if on_break:
            return self.values[t]
        return self.pieces[t].at(x)

    def left_limit(self, t: int):
        """Limit from the left at breakpoint index ``t`` (``t >= 1``)."""
        return self.pieces[t - 1].at(self.breakpoints[t])

    def right_limit(self, t: int):
        """Limit from the right at breakpoint index ``t`` (``t < n``)."""
        return self.pieces[t].at(self.breakpoints[t])

    def sample(self, grid) -> np.ndarray | list:
        out = [self(x) for x in grid]
        if all(isinstance(v, float) for v in out):
            return np.asarray(out, dtype=float)
        return out

    def is_continuous(self) -> bool:
        n = len(self.pieces)
        for t, v in enumerate(self.values):
            if t > 0 and self.left_limit(t) != v:
                return False
            if t < n and self.right_limit(t) != v:
                return False
        return True

    def discontinuities(self) -> list:
        n = len(self.pieces)
        out = []
        for t, v in enumerate(self.values):
            if (t > 0 and self.left_limit(t) != v) or (t < n and self.right_limit(t) != v):
                out.append(self.breakpoints[t])
        return out

    def lipschitz(self):
        """Largest absolute slope; the modulus ``t -> L*t`` holds only if continuous."""
        return max(abs(p.slope) for p in self.pieces)

    # algebra ---------------------------------------------------------------

    def map_values(self, func: Callable[[Piece], Piece], value_func) -> "PiecewiseFunction":
        return PiecewiseFunction(
            self.breakpoints,
            [value_func(v) for v in self.values],
            [func(p) for p in self.pieces],
        )

    def shift(self, c) -> "PiecewiseFunction":
        return self.map_values(lambda p: Piece(p.slope, p.intercept + c), lambda v: v + c)

    def scale(self, k) -> "PiecewiseFunction":
        return self.map_values(lambda p: Piece(k * p.slope, k * p.intercept), lambda v: k * v)

    def __neg__(self):
        return self.scale(-1)

    def __add__(self, other):
        if not isinstance(other, PiecewiseFunction):
            return self.shift(other)
        return _combine(self, other, lambda a, b: a + b, lambda a, b: a + b)

    def __sub__(self, other):
        if not isinstance(other, PiecewiseFunction):
            return self.shift(-other)
        return _combine(self, other, lambda a, b: a - b, lambda a, b: a - b)

    def refine(self, x) -> "PiecewiseFunction":
        """Split the piece containing ``x`` without changing any value."""
        t, on_break = self._locate(x)
        if on_break:
            return self
        bps = list(self.breakpoints)
        vals = list(self.values)
        pcs = list(self.pieces)
        bps.insert(t + 1, x)
        vals.insert(t + 1, pcs[t].at(x))
        pcs.insert(t + 1, pcs[t])
        return PiecewiseFunction(bps, vals, pcs)

    def sup_norm(self):
        best = max(abs(v) for v in self.values)
        for t, p in enumerate(self.pieces):
            best = max(best, abs(p.at(self.breakpoints[t])), abs(p.at(self.breakpoints[t + 1])))
        return best

    def total_variation(self):
        tv = 0 * self.values[0]
        n = len(self.pieces)
        for t, p in enumerate(self.pieces):
            a, b = self.breakpoints[t], self.breakpoints[t + 1]
            tv += abs(p.slope) * (b - a)
        for t, v in enumerate(self.values):
            if t > 0:
                tv += abs(v - self.left_limit(t))
            if t < n:
                tv += abs(self.right_limit(t) - v)
        return tv

    def equals(self, other: "PiecewiseFunction") -> bool:
        """Pointwise equality on [0, 1] (descriptions may differ)."""
        return (self - other).sup_norm() == 0

    def __eq__(self, other):
        if not isinstance(other, PiecewiseFunction):
            return NotImplemented
        return (self.breakpoints == other.breakpoints and self.values == other.values
                and self.pieces == other.pieces)

    __hash__ = None

    def __repr__(self):
        return f"PiecewiseFunction({len(self.pieces)} pieces)"


def _combine(f: PiecewiseFunction, g: PiecewiseFunction, piece_op, value_op) -> PiecewiseFunction:
    bf, bg = f.breakpoints, g.breakpoints
    i = j = 0
    bps, vals, pcs = [], [], []
    # walk the merged breakpoint list; i, j index the gap each function is in
    while True:
        xf, xg = bf[i], bg[j]
        if xf == xg:
            x = xf
            vf, vg = f.values[i], g.values[j]
        elif xf < xg:
            x = xf
            vf, vg = f.values[i], g.pieces[j - 1].at(x)
        else:
            x = xg
            vf, vg = f.pieces[i - 1].at(x), g.values[j]
        bps.append(x)
        vals.append(value_op(vf, vg))
        if x == 1:
            break
        if xf == x:
            i += 1
        if xg == x:
            j += 1
        pcs.append(piece_op(f.pieces[i - 1], g.pieces[j - 1]))
    return PiecewiseFunction(bps, vals, pcs)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Values of a function on an increasing grid of [0, 1] (uniform by default)."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise GridError("grid and values must be 1-d arrays of equal length")
        if len(grid) < 2:
            raise GridError("need at least two grid points")
        if grid[0] != 0.0 or grid[-1] != 1.0:
            raise GridError("grid must start at 0 and end at 1")
        if np.any(np.diff(grid) <= 0):
            raise GridError("grid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("sample values must be finite")

    @classmethod
    def uniform(cls, values) -> "SampledFunction":
        values = np.asarray(values, dtype=float)
        return cls(np.linspace(0.0, 1.0, len(values)), values)

    @classmethod
    def from_callable(cls, func: Callable, n: int) -> "SampledFunction":
        grid = np.linspace(0.0, 1.0, n)
        return cls(grid, np.array([func(x) for x in grid], dtype=float))

    def __len__(self):
        return len(self.grid)

    @property
    def n(self) -> int:
        return len(self.grid)

    @property
    def resolution(self) -> float:
        return 1.0 / (len(self.grid) - 1)

    def is_uniform(self, rtol: float = 1e-9) -> bool:
        return bool(np.allclose(np.diff(self.grid), self.resolution, rtol=rtol, atol=0))

    def reversed(self) -> "SampledFunction":
        """``x -> f(1 - x)`` on the mirrored grid."""
        return SampledFunction(1.0 - self.grid[::-1], self.values[::-1].copy())

    def total_variation(self) -> float:
        return float(np.abs(np.diff(self.values)).sum())

    def interpolant(self, exact: bool = False) -> PiecewiseFunction:
        if exact:
            xs = [Fraction(float(x)) for x in self.grid]
            ys = [Fraction(float(y)) for y in self.values]
            return PiecewiseFunction.interpolant(xs, ys)
        return PiecewiseFunction.interpolant(list(map(float, self.grid)),
                                             list(map(float, self.values)))

    def same_grid(self, other: "SampledFunction") -> bool:
        return len(self.grid) == len(other.grid) and bool(np.array_equal(self.grid, other.grid))

    def __eq__(self, other):
        if not isinstance(other, SampledFunction):
            return NotImplemented
        return self.same_grid(other) and bool(np.array_equal(self.values, other.values))

    __hash__ = None


@dataclass(frozen=True)
class Ball:
    """Closed sup-norm ball."""

    center: Union[PiecewiseFunction, SampledFunction]
    radius: Number

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    def contains(self, f) -> bool:
        return sup_distance(self.center, f) <= self.radius

    def contains_ball(self, other: "Ball") -> bool:
        return sup_distance(self.center, other.center) + other.radius <= self.radius


def evaluate(f: PiecewiseFunction, x):
    return f(x)


def sup_distance(f, g):
    """Sup-norm distance; exact for piecewise functions with rational data."""
    if isinstance(f, PiecewiseFunction) and isinstance(g, PiecewiseFunction):
        return (f - g).sup_norm()
    if isinstance(f, SampledFunction) and isinstance(g, SampledFunction):
        if not f.same_grid(g):
            raise GridError("sampled functions live on different grids")
        return float(np.max(np.abs(f.values - g.values)))
    if isinstance(f, PiecewiseFunction):
        f, g = g, f
    if isinstance(f, SampledFunction) and isinstance(g, PiecewiseFunction):
        other = np.array([float(g(Fraction(float(x)))) for x in f.grid])
        return float(np.max(np.abs(f.values - other)))
    raise TypeError(f"cannot compare {type(f).__name__} with {type(g).__name__}")


def total_variation(f):
    if isinstance(f, (PiecewiseFunction, SampledFunction)):
        return f.total_variation()
    values = np.asarray(list(f), dtype=float)
    return float(np.abs(np.diff(values)).sum())
