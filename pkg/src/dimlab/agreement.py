"""Large agreement sets between a sampled function and Hölder, BV or monotone functions.

Each search works on sample indices and relies on a restriction criterion:
``f`` agrees on ``S`` with some function of the class exactly when ``f|S``
already satisfies the class inequality on ``S``.

* Hölder(α, K): the pairwise inequality on ``S``; the inf-convolution
  ``min_s f(s) + K|x - s|^α`` is an in-class extension.
* Var ≤ V: the variation of ``f`` along the points of ``S`` in order.  Any
  extension passes through those values in that order, so its variation is
  at least this sum, and the piecewise-linear interpolant attains it.
* Monotone: ``f|S`` is monotone; a step function extends it.

In exact mode (rational α, K, V) sample values are treated as the exact
binary rationals they are, and every verdict is decided in rational
arithmetic after a floating-point screen.
"""
from __future__ import annotations

import bisect
import csv
import io
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .capacity import DimensionEstimate, GridSubset, ParameterError, estimate_dimension
from .exact import as_fraction, format_fraction, pow_compare
from .functions import PiecewiseFunction, SampledFunction
from .generator import GeneratorError, GeneratorSpec, generate
from .rng import splitmix64

__all__ = [
    "PreconditionError",
    "SubsetWitness",
    "WitnessCheck",
    "compat_matrix",
    "holder_compatible",
    "extend_holder",
    "max_holder_subset",
    "restricted_variation",
    "max_bv_subset",
    "max_monotone_subset",
    "longest_monotone_length_quadratic",
    "hull_dimension",
    "witness_cells",
    "check_witness",
    "ProbeRow",
    "threshold_probe",
    "probe_csv",
    "probe_medians",
]

SCREEN_RTOL = 1e-9
FLOAT_RTOL = 1e-12


class PreconditionError(ValueError):
    pass


def _is_exact(*xs) -> bool:
    return all(isinstance(x, (Fraction, int)) and not isinstance(x, bool) for x in xs)


def _param(x):
    """Rationals from strings and ints; floats stay floats (empirical mode)."""
    if isinstance(x, str):
        return as_fraction(x)
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    return x


def _q(x) -> Fraction:
    return Fraction(float(x))


def _indices(f: SampledFunction, S) -> list[int]:
    idx = sorted({int(i) for i in S})
    if idx and (idx[0] < 0 or idx[-1] >= f.n):
        raise PreconditionError("subset indices must address grid points")
    return idx


# --------------------------------------------------------------------------
# Hölder

def compat_matrix(xs, ys, alpha, K) -> np.ndarray:
    """Boolean matrix of pairs satisfying ``|y_i - y_j| <= K |x_i - x_j|^alpha``.

    A float screen decides clear cases; pairs within a relative ``1e-9`` of
    equality are re-decided exactly when ``alpha`` and ``K`` are rational,
    or with relative tolerance ``1e-12`` otherwise.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    n = len(xs)
    exact = _is_exact(alpha, K)
    a, k = float(alpha), float(K)
    out = np.ones((n, n), dtype=bool)
    chunk = max(1, 2 ** 22 // max(n, 1))
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        dx = np.abs(xs[lo:hi, None] - xs[None, :])
        dy = np.abs(ys[lo:hi, None] - ys[None, :])
        rhs = k * dx ** a
        close = np.abs(dy - rhs) <= SCREEN_RTOL * (dy + rhs)
        ok = dy <= rhs
        close &= dy > 0
        for i, j in zip(*np.nonzero(close)):
            i += lo
            if exact:
                dyq = abs(_q(ys[i]) - _q(ys[j]))
                ok[i - lo, j] = pow_compare(abs(_q(xs[i]) - _q(xs[j])), alpha, dyq / K) >= 0
            else:
                ok[i - lo, j] = dy[i - lo, j] <= rhs[i - lo, j] * (1 + FLOAT_RTOL)
        out[lo:hi] = ok
    return out


def holder_compatible(f: SampledFunction, S, alpha, K) -> bool:
    alpha, K = _param(alpha), _param(K)
    idx = _indices(f, S)
    if len(idx) <= 1:
        return True
    return bool(compat_matrix(f.grid[idx], f.values[idx], alpha, K).all())


def extend_holder(f: SampledFunction, S, alpha, K, refine: int = 1) -> PiecewiseFunction:
    """In-class piecewise-linear extension of ``f|S``.

    Node values sit on the sample grid refined ``refine`` times and follow
    the inf-convolution ``min_s f(s) + K|x - s|^alpha`` (shaded down by a
    rounding margin, never below the matching sup-convolution).  Values on
    ``S`` are the samples themselves.  The result is checked on all pairs of
    breakpoints, which decides the Hölder property of a piecewise-linear
    function, and nodes off ``S`` that fail are dropped until it holds.
    """
    alpha, K = _param(alpha), _param(K)
    idx = _indices(f, S)
    if not idx:
        raise PreconditionError("cannot extend from an empty subset")
    if not holder_compatible(f, idx, alpha, K):
        raise PreconditionError("f restricted to S is not Hölder with these constants")
    if refine < 1:
        raise ParameterError("refine must be at least 1")
    grid = f.grid
    fine = np.concatenate([np.linspace(grid[t], grid[t + 1], refine + 1)[:-1]
                           for t in range(len(grid) - 1)] + [grid[-1:]])
    sx, sy = grid[idx], f.values[idx]
    a, k = float(alpha), float(K)
    dist = np.abs(fine[:, None] - sx[None, :]) ** a
    upper = np.min(sy[None, :] + k * dist, axis=1)
    lower = np.max(sy[None, :] - k * dist, axis=1)
    margin = np.minimum(FLOAT_RTOL * (1.0 + np.abs(upper)), (upper - lower) / 2)
    vals = upper - np.maximum(margin, 0.0)

    on_s = {float(x): float(y) for x, y in zip(sx, sy)}
    xs = [Fraction(float(x)) for x in fine]
    ys = [Fraction(on_s[float(x)]) if float(x) in on_s else Fraction(float(v))
          for x, v in zip(fine, vals)]
    if _is_exact(alpha, K) and alpha == 1:
        # everything is rational: use the exact inf-convolution
        sq = [(Fraction(float(x)), Fraction(float(y))) for x, y in zip(sx, sy)]
        ys = [Fraction(on_s[float(x)]) if float(x) in on_s else
              min(y + K * abs(xq - x0) for x0, y in sq) for x, xq in zip(fine, xs)]
    keep = [True] * len(xs)
    fixed = {i for i, x in enumerate(fine) if float(x) in on_s}
    while True:
        live = [i for i in range(len(xs)) if keep[i]]
        bad = _exact_holder_violations([xs[i] for i in live], [ys[i] for i in live], alpha, K)
        if not bad:
            break
        drop = {live[i] for pair in bad for i in pair} - fixed
        if not drop:
            raise PreconditionError("no in-class extension found on this grid")
        for i in drop:
            keep[i] = False
    live = [i for i in range(len(xs)) if keep[i]]
    return PiecewiseFunction.interpolant([xs[i] for i in live], [ys[i] for i in live])


def _exact_holder_violations(xs, ys, alpha, K) -> list[tuple[int, int]]:
    """Pairs violating the Hölder inequality, decided exactly for rational data."""
    fx = np.array([float(x) for x in xs])
    fy = np.array([float(y) for y in ys])
    a, k = float(alpha), float(K)
    exact = _is_exact(alpha, K)
    bad = []
    n = len(xs)
    chunk = max(1, 2 ** 22 // max(n, 1))
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        dx = np.abs(fx[lo:hi, None] - fx[None, :])
        dy = np.abs(fy[lo:hi, None] - fy[None, :])
        rhs = k * dx ** a
        suspect = (dy > 0) & (dy >= rhs * (1 - SCREEN_RTOL))
        for i, j in zip(*np.nonzero(suspect)):
            i += lo
            if i >= j:
                continue
            if exact:
                if pow_compare(xs[j] - xs[i], alpha, abs(ys[j] - ys[i]) / K) < 0:
                    bad.append((i, j))
            elif dy[i - lo, j] > rhs[i - lo, j] * (1 + FLOAT_RTOL):
                bad.append((i, j))
    return bad


def _max_clique_exact(adj: np.ndarray) -> list[int]:
    n = len(adj)
    nbr = [sum(1 << j for j in range(n) if j != i and adj[i, j]) for i in range(n)]
    best: list[int] = []

    def expand(chosen: list[int], cand: int):
        nonlocal best
        if not cand:
            if len(chosen) > len(best):
                best = list(chosen)
            return
        if len(chosen) + bin(cand).count("1") <= len(best):
            return
        while cand:
            if len(chosen) + bin(cand).count("1") <= len(best):
                return
            v = cand.bit_length() - 1
            cand &= ~(1 << v)
            chosen.append(v)
            expand(chosen, cand & nbr[v])
            chosen.pop()

    expand([], (1 << n) - 1)
    return sorted(best)


def _max_clique_heuristic(adj: np.ndarray, rounds: int = 50) -> list[int]:
    """Greedy by degree, improved by (1, 2)-swaps until no swap helps."""
    n = len(adj)
    deg = adj.sum(axis=1)
    order = sorted(range(n), key=lambda i: (-int(deg[i]), i))
    chosen = np.zeros(n, dtype=bool)
    for v in order:
        if adj[v, chosen].all():
            chosen[v] = True
    for _ in range(rounds):
        conflicts = (~adj[:, chosen]).sum(axis=1)
        free = np.nonzero(~chosen & (conflicts == 0))[0]
        if len(free):
            chosen[free[0]] = True
            continue
        improved = False
        for u in np.nonzero(chosen)[0]:
            # outsiders blocked only by u
            single = np.nonzero(~chosen & (conflicts == 1) & ~adj[:, u])[0]
            if len(single) < 2:
                continue
            sub = adj[np.ix_(single, single)]
            first = int(np.argmax(sub.sum(axis=1)))
            partners = np.nonzero(sub[first])[0]
            partners = partners[partners != first]
            if len(partners):
                chosen[u] = False
                chosen[single[first]] = True
                chosen[single[partners[0]]] = True
                improved = True
                break
        if not improved:
            break
    return [int(i) for i in np.nonzero(chosen)[0]]


def max_holder_subset(f: SampledFunction, alpha, K, budget: int = 20,
                      dimension: bool = True) -> "SubsetWitness":
    """Largest ``S`` with ``f|S`` Hölder(α, K).

    Exact branch-and-bound over the compatibility graph when ``f.n <= budget``,
    greedy plus local search above; ``mode`` records which one ran.
    """
    alpha, K = _param(alpha), _param(K)
    if not 0 < alpha <= 1:
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha}")
    if not K >= 0:
        raise ParameterError("K must be non-negative")
    adj = compat_matrix(f.grid, f.values, alpha, K)
    if adj.all():
        idx, mode = list(range(f.n)), "exact"
    elif f.n <= budget:
        idx, mode = _max_clique_exact(adj), "exact"
    else:
        idx, mode = _max_clique_heuristic(adj), "heuristic"
    ext = extend_holder(f, idx, alpha, K)
    cls = {"name": "holder", "alpha": alpha, "K": K}
    return SubsetWitness.build(f, idx, cls, ext, mode, _is_exact(alpha, K), dimension)


# --------------------------------------------------------------------------
# bounded variation

def restricted_variation(f: SampledFunction, S, exact: bool = True):
    """Variation of ``f`` along the points of ``S`` in increasing order."""
    idx = _indices(f, S)
    if not idx:
        raise PreconditionError("restricted variation needs a non-empty subset")
    if exact:
        ys = [_q(f.values[i]) for i in idx]
        return sum((abs(b - a) for a, b in zip(ys, ys[1:])), Fraction(0))
    return float(np.abs(np.diff(f.values[idx])).sum())


def _bv_table(ys, number=float):
    """``best[j][c]``: least variation of a chain of ``c + 1`` points ending at ``j``."""
    n = len(ys)
    if number is float:
        y = np.asarray(ys, dtype=float)
        best = np.full((n, n), np.inf)
        parent = np.full((n, n), -1, dtype=int)
        best[:, 0] = 0.0
        for j in range(1, n):
            cand = best[:j, :-1] + np.abs(y[j] - y[:j])[:, None]
            arg = np.argmin(cand, axis=0)
            best[j, 1:] = cand[arg, np.arange(n - 1)]
            parent[j, 1:] = arg
        return best, parent
    inf = None
    best = [[inf] * n for _ in range(n)]
    parent = [[-1] * n for _ in range(n)]
    for j in range(n):
        best[j][0] = Fraction(0)
        for c in range(1, j + 1):
            for i in range(j):
                b = best[i][c - 1]
                if b is None:
                    continue
                v = b + abs(ys[j] - ys[i])
                if best[j][c] is None or v < best[j][c]:
                    best[j][c], parent[j][c] = v, i
    return best, parent


def _bv_chain(parent, j, c) -> list[int]:
    out = [j]
    while c > 0:
        j = int(parent[j][c])
        c -= 1
        out.append(j)
    return out[::-1]


def max_bv_subset(f: SampledFunction, V, budget: Optional[int] = None,
                  dimension: bool = True) -> "SubsetWitness":
    """Largest ``S`` whose restricted variation is at most ``V``.

    Dynamic program over (last index, size) keeping the least variation; a
    float table is confirmed in rational arithmetic and recomputed exactly
    in the rare event of a near tie.  ``budget`` is accepted for interface
    symmetry; the program is exact at every size.
    """
    V = _param(V)
    if V < 0:
        raise ParameterError("V must be non-negative")
    exact = _is_exact(V)
    n = f.n
    best, parent = _bv_table(f.values)
    limit = float(V) * (1 + FLOAT_RTOL)
    idx = None
    for c in range(n - 1, -1, -1):
        js = np.nonzero(best[:, c] <= limit)[0]
        if len(js):
            j = int(js[np.argmin(best[js, c])])
            cand = _bv_chain(parent, j, c)
            if not exact or restricted_variation(f, cand) <= V:
                idx = cand
                break
            qbest, qparent = _bv_table([_q(y) for y in f.values], Fraction)
            for c2 in range(n - 1, -1, -1):
                hits = [(qbest[jj][c2], jj) for jj in range(n)
                        if qbest[jj][c2] is not None and qbest[jj][c2] <= V]
                if hits:
                    idx = _bv_chain(qparent, min(hits)[1], c2)
                    break
            break
    assert idx is not None
    xs = [_q(f.grid[i]) for i in idx]
    ys = [_q(f.values[i]) for i in idx]
    ext = PiecewiseFunction.interpolant(xs, ys)
    cls = {"name": "bv", "V": V}
    return SubsetWitness.build(f, idx, cls, ext, "exact", exact, dimension)


# --------------------------------------------------------------------------
# monotone

def _longest_nondecreasing(vals) -> list[int]:
    tails: list[float] = []
    tail_idx: list[int] = []
    prev = [-1] * len(vals)
    for i, v in enumerate(vals):
        pos = bisect.bisect_right(tails, v)
        if pos == len(tails):
            tails.append(v)
            tail_idx.append(i)
        else:
            tails[pos] = v
            tail_idx[pos] = i
        prev[i] = tail_idx[pos - 1] if pos else -1
    out = []
    i = tail_idx[-1] if tail_idx else -1
    while i >= 0:
        out.append(i)
        i = prev[i]
    return out[::-1]


def longest_monotone_length_quadratic(values) -> int:
    """Reference O(n^2) dynamic program for the longest monotone subsequence."""
    vals = list(values)
    if not vals:
        return 0
    up = [1] * len(vals)
    down = [1] * len(vals)
    for j in range(len(vals)):
        for i in range(j):
            if vals[i] <= vals[j]:
                up[j] = max(up[j], up[i] + 1)
            if vals[i] >= vals[j]:
                down[j] = max(down[j], down[i] + 1)
    return max(max(up), max(down))


def max_monotone_subset(f: SampledFunction, dimension: bool = True) -> "SubsetWitness":
    vals = [float(v) for v in f.values]
    inc = _longest_nondecreasing(vals)
    dec = _longest_nondecreasing([-v for v in vals])
    if len(dec) > len(inc):
        idx, direction = dec, "nonincreasing"
    else:
        idx, direction = inc, "nondecreasing"
    xs = [_q(f.grid[i]) for i in idx]
    ys = [_q(f.values[i]) for i in idx]
    ext = PiecewiseFunction.step(xs, ys)
    cls = {"name": "monotone", "direction": direction}
    return SubsetWitness.build(f, idx, cls, ext, "exact", True, dimension)


# --------------------------------------------------------------------------
# witnesses

def hull_dimension(f_n: int, idx: Sequence[int]) -> Optional[DimensionEstimate]:
    """Box dimension of the union of grid cells holding the chosen points.

    Point ``i`` maps to cell ``min(i, n - 2)`` of width ``1/(n - 1)``; scales
    double from the cell width up to 1/4.  Returns None with fewer than
    three usable scales.
    """
    cells = witness_cells(f_n, idx)
    delta = cells.resolution
    scales = []
    s = delta
    while s <= Fraction(1, 4):
        scales.append(s)
        s *= 2
    if len(scales) < 3 or not idx:
        return None
    return estimate_dimension(cells, scales)


def witness_cells(f_n: int, idx: Sequence[int]) -> GridSubset:
    """Grid cells of width ``1/(n - 1)`` holding the sample points ``idx``."""
    return GridSubset(Fraction(1, f_n - 1), tuple(sorted({min(i, f_n - 2) for i in idx})))


def _cls_to_json(cls: dict) -> dict:
    return {k: format_fraction(v) if isinstance(v, Fraction) else v for k, v in cls.items()}


def _cls_from_json(data: dict) -> dict:
    out = {}
    for k, v in data.items():
        out[k] = as_fraction(v) if isinstance(v, str) and k != "name" and k != "direction" else v
    return out


@dataclass
class SubsetWitness:
    xs: list
    ys: list
    cls: dict
    extension: PiecewiseFunction
    dimension: Optional[DimensionEstimate]
    mode: str
    exact: bool = True
    n: int = 0
    indices: list = field(default_factory=list)

    @classmethod
    def build(cls, f, idx, klass, ext, mode, exact, dimension=True) -> "SubsetWitness":
        idx = sorted(idx)
        dim = hull_dimension(f.n, idx) if dimension else None
        return cls([_q(f.grid[i]) for i in idx], [_q(f.values[i]) for i in idx],
                   klass, ext, dim, mode, exact, f.n, idx)

    def __len__(self):
        return len(self.xs)

    @property
    def size(self) -> int:
        return len(self.xs)

    def to_json(self) -> dict:
        from .serialize import num_out, piecewise_to_json
        return {
            "format": "dimlab-witness/1",
            "class": _cls_to_json(self.cls),
            "mode": self.mode,
            "exact": self.exact,
            "n": self.n,
            "size": len(self.xs),
            "indices": list(self.indices),
            "points": {"x": [num_out(x) for x in self.xs], "y": [num_out(y) for y in self.ys]},
            "extension": piecewise_to_json(self.extension),
            "dimension": None if self.dimension is None else self.dimension.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SubsetWitness":
        from .serialize import num_in, piecewise_from_json
        dim = data.get("dimension")
        return cls(
            [num_in(x) for x in data["points"]["x"]],
            [num_in(y) for y in data["points"]["y"]],
            _cls_from_json(data["class"]),
            piecewise_from_json(data["extension"]),
            None if dim is None else DimensionEstimate.from_json(dim),
            data["mode"],
            bool(data.get("exact", True)),
            int(data.get("n", 0)),
            list(data.get("indices", [])),
        )

    def __eq__(self, other):
        if not isinstance(other, SubsetWitness):
            return NotImplemented
        return self.to_json() == other.to_json()


@dataclass(frozen=True)
class WitnessCheck:
    id: str
    ok: bool
    detail: str = ""


def check_witness(w: SubsetWitness) -> list[WitnessCheck]:
    """Re-check a witness from its own data: agreement on the points, class membership."""
    g = w.extension
    checks = []
    sorted_ok = all(a < b for a, b in zip(w.xs, w.xs[1:])) and len(w.xs) == len(w.ys)
    checks.append(WitnessCheck("points_sorted", sorted_ok))
    misses = [x for x, y in zip(w.xs, w.ys) if g(x) != y]
    checks.append(WitnessCheck("agrees_on_points", not misses,
                               f"{len(misses)} disagreement(s)" if misses else ""))
    name = w.cls.get("name")
    if name == "holder":
        alpha, K = w.cls["alpha"], w.cls["K"]
        cont = g.is_continuous()
        bad = _exact_holder_violations(g.breakpoints, g.values, alpha, K) if cont else [None]
        checks.append(WitnessCheck("extension_in_class", cont and not bad,
                                   "" if not bad else f"{len(bad)} violating breakpoint pair(s)"))
    elif name == "bv":
        tv = g.total_variation()
        checks.append(WitnessCheck("extension_in_class", tv <= w.cls["V"], f"variation {tv}"))
    elif name == "monotone":
        up = w.cls.get("direction", "nondecreasing") == "nondecreasing"
        seq = []
        for t, p in enumerate(g.pieces):
            seq += [g.values[t], p.at(g.breakpoints[t]), p.at(g.breakpoints[t + 1])]
        seq.append(g.values[-1])
        # a constant-or-linear piece is monotone, so checking the ordered endpoint values suffices
        mono = all((a <= b) if up else (a >= b) for a, b in zip(seq, seq[1:]))
        checks.append(WitnessCheck("extension_in_class", mono, w.cls.get("direction", "")))
    else:
        checks.append(WitnessCheck("extension_in_class", False, f"unknown class {name!r}"))
    return checks


# --------------------------------------------------------------------------
# threshold probe

REFERENCE = {"holder": "1-alpha", "bv": "1/2", "monotone": "-"}


@dataclass(frozen=True)
class ProbeRow:
    cls: str
    param: str
    trial: int
    n: int
    subset_size: int
    box_dim: float
    residual: float
    mode: str

    def key(self):
        return (self.cls, _sort_param(self.param), self.n, self.trial)

    def cells(self) -> list[str]:
        return [self.cls, self.param, str(self.trial), str(self.n), str(self.subset_size),
                _fmt6(self.box_dim), _fmt6(self.residual), self.mode]


def _fmt6(x: float) -> str:
    return "nan" if x != x else f"{x:.6f}"


def _sort_param(p: str):
    try:
        return (0, float(as_fraction(p)))
    except (ValueError, ZeroDivisionError):
        return (1, p)


def trial_seed(seed: int, trial: int) -> int:
    _, out = splitmix64((seed * 0x9E3779B97F4A7C15 + trial) & ((1 << 64) - 1))
    return out


def _run_probe_task(task) -> ProbeRow:
    family, cls, param, trial, n, seed, K, budget = task
    try:
        spec = GeneratorSpec.parse(family, seed=trial_seed(seed, trial), n=n)
        f = generate(spec)
        if cls == "holder":
            w = max_holder_subset(f, param, K, budget)
        elif cls == "bv":
            w = max_bv_subset(f, param)
        else:
            w = max_monotone_subset(f)
    except (GeneratorError, ValueError):
        # marked failed; the run continues
        return ProbeRow(cls, param, trial, n, 0, math.nan, math.nan, "failed")
    dim = w.dimension
    slope = dim.slope if dim is not None else math.nan
    resid = dim.residual if dim is not None else math.nan
    return ProbeRow(cls, param, trial, n, w.size, slope, resid, w.mode)


def threshold_probe(family: str, cls: str, params: Sequence, trials: int, seed: int = 0,
                    ns: Sequence[int] = (129,), K="1", budget: int = 20,
                    jobs: int = 1) -> list[ProbeRow]:
    """Subset search plus hull dimension for every (parameter, trial, resolution).

    Rows come back sorted by key so the output does not depend on ``jobs``.
    Exploratory only: nothing here is compared against a theorem.
    """
    if cls not in REFERENCE:
        raise ParameterError(f"class must be one of {', '.join(REFERENCE)}")
    if trials < 1:
        raise ParameterError("trials must be positive")
    params = ["-"] if cls == "monotone" else [str(p) for p in params]
    if not params:
        raise ParameterError("need at least one parameter value")
    tasks = [(family, cls, p, t, int(n), int(seed), str(K), int(budget))
             for p in params for t in range(trials) for n in ns]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_probe_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        rows = [_run_probe_task(t) for t in tasks]
    return sorted(rows, key=ProbeRow.key)


PROBE_COLUMNS = ["class", "param", "trial", "n", "subset_size", "box_dim", "residual", "mode"]


def probe_csv(rows: Sequence[ProbeRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PROBE_COLUMNS)
    for row in sorted(rows, key=ProbeRow.key):
        writer.writerow(row.cells())
    return buf.getvalue()


def probe_medians(rows: Sequence[ProbeRow]) -> list[dict]:
    """Median subset size and box dimension per (class, param, n), with the reference line."""
    groups: dict = {}
    for r in rows:
        if r.mode != "failed":
            groups.setdefault((r.cls, r.param, r.n), []).append(r)
    out = []
    for (cls, param, n), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], _sort_param(kv[0][1]), kv[0][2])):
        dims = [r.box_dim for r in rs if r.box_dim == r.box_dim]
        if cls == "holder":
            ref = 1 - float(as_fraction(param))
        elif cls == "bv":
            ref = 0.5
        else:
            ref = math.nan
        out.append({"class": cls, "param": param, "n": n, "trials": len(rs),
                    "median_size": statistics.median(r.subset_size for r in rs),
                    "median_box_dim": statistics.median(dims) if dims else math.nan,
                    "reference": ref})
    return out
