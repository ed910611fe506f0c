"""Deterministic probe functions: analytic fractal families and seeded random proxies.

None of these is a "typical" continuous function in the Baire sense; a
residual set carries no probability distribution to sample from.  They are
stand-ins with known roughness.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .exact import as_fraction, format_fraction
from .functions import PiecewiseFunction, SampledFunction
from .rng import VERSION as RNG_VERSION, Xoshiro256

__all__ = [
    "FAMILIES",
    "GeneratorError",
    "UnsupportedOracleError",
    "GeneratorSpec",
    "Modulus",
    "generate",
    "modulus_oracle",
    "exact_piecewise",
    "takagi_value",
]

FAMILIES = ("constant", "linear", "weierstrass", "takagi",
            "midpoint_displacement", "faber_schauder")

DEFAULTS = {
    "constant": {"c": 0},
    "linear": {"slope": 1, "intercept": 0},
    "weierstrass": {"a": 0.5, "b": 3, "terms": 12},
    "takagi": {"terms": 12},
    "midpoint_displacement": {"hurst": 0.5, "sigma": 1.0},
    "faber_schauder": {"decay": 0.5, "depth": None},
}

INT_PARAMS = {"terms", "depth"}
EXACT_FAMILIES = ("constant", "linear", "takagi")


class GeneratorError(ValueError):
    pass


class UnsupportedOracleError(GeneratorError):
    pass


def _coerce(name: str, value):
    if value is None:
        return None
    if name in INT_PARAMS:
        return int(value)
    if isinstance(value, str):
        return as_fraction(value) if "/" in value else float(value) if any(
            ch in value for ch in ".eE") else Fraction(int(value))
    if isinstance(value, int):
        return Fraction(value)
    return value


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    n: int = 4097

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise GeneratorError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        merged = dict(DEFAULTS[self.family])
        unknown = set(self.params) - set(merged)
        if unknown:
            raise GeneratorError(f"unknown parameters for {self.family}: {sorted(unknown)}")
        merged.update(self.params)
        merged = {k: _coerce(k, v) for k, v in merged.items()}
        object.__setattr__(self, "params", merged)
        n = int(self.n)
        if n < 3 or (n - 1) & (n - 2):
            raise GeneratorError(f"resolution n must be a power of two plus one, got {n}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "seed", int(self.seed) & ((1 << 64) - 1))
        self._validate()

    @property
    def depth(self) -> int:
        return (self.n - 1).bit_length() - 1

    def _validate(self):
        p = self.params
        if self.family == "weierstrass":
            a, b = float(p["a"]), float(p["b"])
            if not 0 < a < 1:
                raise GeneratorError("weierstrass needs 0 < a < 1")
            if a * b < 1:
                raise GeneratorError("weierstrass needs a*b >= 1")
            if p["terms"] < 1:
                raise GeneratorError("weierstrass needs terms >= 1")
        elif self.family == "takagi":
            if p["terms"] < 1:
                raise GeneratorError("takagi needs terms >= 1")
        elif self.family == "midpoint_displacement":
            if not 0 < float(p["hurst"]) < 1:
                raise GeneratorError("midpoint_displacement needs 0 < hurst < 1")
            if not float(p["sigma"]) > 0:
                raise GeneratorError("midpoint_displacement needs sigma > 0")
        elif self.family == "faber_schauder":
            if not float(p["decay"]) > 0:
                raise GeneratorError("faber_schauder needs decay > 0")
            depth = p["depth"]
            if depth is not None and not 1 <= depth <= self.depth:
                raise GeneratorError(f"faber_schauder depth must be in [1, {self.depth}]")

    @classmethod
    def parse(cls, text: str, seed: int = 0, n: int = 4097) -> "GeneratorSpec":
        """``"family"`` or ``"family:key=value,key=value"``."""
        family, _, rest = text.partition(":")
        params = {}
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, sep, value = item.partition("=")
            if not sep:
                raise GeneratorError(f"malformed parameter {item!r}; expected key=value")
            params[key.strip()] = value.strip()
        return cls(family.strip(), params, seed, n)

    def describe(self) -> str:
        items = ",".join(f"{k}={_fmt(v)}" for k, v in sorted(self.params.items()) if v is not None)
        return f"{self.family}:{items}" if items else self.family

    def to_json(self) -> dict:
        return {"family": self.family,
                "params": {k: _fmt(v) for k, v in self.params.items() if v is not None},
                "seed": self.seed, "n": self.n, "rng": RNG_VERSION}


def _fmt(v):
    if isinstance(v, Fraction):
        return format_fraction(v)
    return v


def takagi_value(x, terms: int):
    """Partial Takagi sum ``sum_{i<terms} dist(2**i x, Z) / 2**i``; exact for Fractions."""
    total = 0 * x
    for i in range(terms):
        y = x * 2 ** i
        frac = y - math.floor(y)
        total += min(frac, 1 - frac) / 2 ** i
    return total


def generate(spec: GeneratorSpec) -> SampledFunction:
    x = np.linspace(0.0, 1.0, spec.n)
    p = spec.params
    fam = spec.family
    if fam == "constant":
        y = np.full(spec.n, float(p["c"]))
    elif fam == "linear":
        y = float(p["slope"]) * x + float(p["intercept"])
    elif fam == "weierstrass":
        a, b = float(p["a"]), float(p["b"])
        y = np.zeros(spec.n)
        for i in range(p["terms"]):
            y += a ** i * np.cos(2 * math.pi * b ** i * x)
    elif fam == "takagi":
        y = np.zeros(spec.n)
        for i in range(p["terms"]):
            u = x * 2.0 ** i
            y += np.abs(u - np.round(u)) / 2.0 ** i
    elif fam == "midpoint_displacement":
        y = _midpoint_displacement(spec)
    elif fam == "faber_schauder":
        y = _faber_schauder(spec)
    else:  # pragma: no cover - GeneratorSpec rejects unknown families
        raise GeneratorError(fam)
    return SampledFunction(x, y)


def _midpoint_displacement(spec: GeneratorSpec) -> np.ndarray:
    rng = Xoshiro256(spec.seed)
    h, sigma = float(spec.params["hurst"]), float(spec.params["sigma"])
    n = spec.n
    y = np.zeros(n)
    y[-1] = sigma * rng.normal()
    scale = math.sqrt(1.0 - 2.0 ** (2 * h - 2))
    step = n - 1
    level = 0
    while step > 1:
        level += 1
        half = step // 2
        sd = sigma * scale * 2.0 ** (-level * h)
        for left in range(0, n - 1, step):
            mid = left + half
            y[mid] = 0.5 * (y[left] + y[left + step]) + sd * rng.normal()
        step = half
    return y


def _faber_schauder(spec: GeneratorSpec) -> np.ndarray:
    rng = Xoshiro256(spec.seed)
    decay = float(spec.params["decay"])
    depth = spec.params["depth"] or spec.depth
    x = np.linspace(0.0, 1.0, spec.n)
    y = np.zeros(spec.n)
    for level in range(depth):
        count = 1 << level
        coef = np.array([rng.normal() for _ in range(count)]) * 2.0 ** (-decay * level)
        u = x * count
        j = np.minimum(np.floor(u).astype(int), count - 1)
        local = u - j
        y += coef[j] * (1.0 - np.abs(2.0 * local - 1.0))
    return y


class Modulus:
    """Certified bound on the oscillation of a function over intervals of length ``t``."""

    def __init__(self, func: Callable, name: str, certified: bool = True, exact: bool = True):
        self._func = func
        self.name = name
        self.certified = certified
        self.exact = exact

    def __call__(self, t):
        if t < 0:
            raise ValueError("interval length must be non-negative")
        return self._func(t)

    def __repr__(self):
        return f"Modulus({self.name!r}, certified={self.certified})"


def modulus_oracle(spec: GeneratorSpec) -> Modulus:
    p = spec.params
    fam = spec.family
    if fam == "constant":
        return Modulus(lambda t: 0 * t, "constant")
    if fam == "linear":
        slope = abs(p["slope"])
        return Modulus(lambda t: slope * t, f"linear(|slope|={_fmt(slope)})",
                       exact=isinstance(slope, Fraction))
    if fam == "takagi":
        terms = p["terms"]

        def takagi_mod(t):
            half = Fraction(1, 2) if isinstance(t, Fraction) else 0.5
            return sum((min(2 ** i * t, half) / 2 ** i for i in range(terms)), 0 * t)
        return Modulus(takagi_mod, f"takagi(terms={terms})")
    if fam == "weierstrass":
        a, b, terms = float(p["a"]), float(p["b"]), p["terms"]

        def weier_mod(t):
            t = float(t)
            return math.fsum(a ** i * min(2 * math.pi * b ** i * t, 2.0) for i in range(terms))
        return Modulus(weier_mod, f"weierstrass(a={a},b={b},terms={terms})", exact=False)
    raise UnsupportedOracleError(
        f"no closed-form modulus for {fam}; use a grid-Lipschitz estimate instead")


def exact_piecewise(spec: GeneratorSpec) -> PiecewiseFunction:
    """Exact rational piecewise-linear form of the constant, linear and takagi families."""
    p = spec.params
    if spec.family == "constant":
        return PiecewiseFunction.constant(as_fraction(p["c"]))
    if spec.family == "linear":
        return PiecewiseFunction.linear(as_fraction(p["slope"]), as_fraction(p["intercept"]))
    if spec.family == "takagi":
        terms = p["terms"]
        xs = [Fraction(j, 2 ** terms) for j in range(2 ** terms + 1)]
        return PiecewiseFunction.interpolant(xs, [takagi_value(x, terms) for x in xs])
    raise UnsupportedOracleError(f"{spec.family} has no exact piecewise form")
