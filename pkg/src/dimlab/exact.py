"""Exact comparisons involving rational powers of rationals.

Everything here works on :class:`fractions.Fraction` and Python integers, so
verdicts never depend on floating point rounding.  A real power ``x**(a/b)``
is handled either by raising both sides of a comparison to the ``b``-th power,
or by a dyadic enclosure ``lo <= x**(a/b) <= hi`` computed with integer roots.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

__all__ = [
    "as_fraction",
    "parse_fraction",
    "format_fraction",
    "iroot",
    "pow_bounds",
    "pow_compare",
    "pow_float",
    "sum_pow_bounds",
    "sum_pow_less",
]


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions, ``"p/q"`` strings and floats (exactly) to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return parse_fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(value)
    # numpy scalars and similar
    return Fraction(float(value))


def parse_fraction(text: str) -> Fraction:
    text = text.strip()
    if not text:
        raise ValueError("empty rational")
    return Fraction(text)


def format_fraction(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def iroot(n: int, k: int) -> int:
    """Floor of the real k-th root of a non-negative integer."""
    if n < 0 or k < 1:
        raise ValueError("iroot needs n >= 0 and k >= 1")
    if n < 2 or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    # Newton iteration from an upper starting point
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def _split_exponent(e) -> tuple[int, int]:
    e = as_fraction(e)
    if e <= 0:
        raise ValueError(f"exponent must be positive, got {e}")
    return e.numerator, e.denominator


def pow_bounds(x, e, bits: int = 64) -> tuple[Fraction, Fraction]:
    """Rational enclosure ``lo <= x**e <= hi`` with ``hi - lo <= 2**-bits``.

    ``lo == hi`` exactly when ``x**e`` is a dyadic rational at that precision,
    in particular whenever ``x**e`` is an integer multiple of ``2**-bits``.
    """
    x = as_fraction(x)
    if x < 0:
        raise ValueError("pow_bounds needs x >= 0")
    a, b = _split_exponent(e)
    if x == 0:
        return Fraction(0), Fraction(0)
    if b == 1:
        v = x ** a
        return v, v
    p, q = x.numerator ** a, x.denominator ** a
    # exact b-th root of p/q?
    rp, rq = iroot(p, b), iroot(q, b)
    if rp ** b == p and rq ** b == q:
        v = Fraction(rp, rq)
        return v, v
    scale = 1 << (bits * b)
    big = (p * scale) // q
    r = iroot(big, b)
    lo = Fraction(r, 1 << bits)
    if r ** b * q == p * scale:
        return lo, lo
    return lo, Fraction(r + 1, 1 << bits)


def pow_float(x, e) -> float:
    return float(as_fraction(x)) ** float(as_fraction(e))


def pow_compare(x, e, y) -> int:
    """Sign of ``x**e - y`` for rationals ``x, y >= 0`` and rational ``e > 0``."""
    x, y = as_fraction(x), as_fraction(y)
    if x < 0 or y < 0:
        raise ValueError("pow_compare needs non-negative operands")
    a, b = _split_exponent(e)
    # x**(a/b) vs y  <=>  x**a vs y**b
    lhs, rhs = x ** a, y ** b
    return (lhs > rhs) - (lhs < rhs)


def sum_pow_bounds(
    terms: Iterable[tuple[Fraction, Fraction]], e, bits: int = 64
) -> tuple[Fraction, Fraction]:
    """Enclosure of ``sum(c * x**e)`` over ``(c, x)`` pairs with ``c >= 0``.

    Equal bases are grouped first so the root is taken once per distinct base.
    """
    grouped: dict[Fraction, Fraction] = {}
    for c, x in terms:
        c, x = as_fraction(c), as_fraction(x)
        if c < 0:
            raise ValueError("coefficients must be non-negative")
        grouped[x] = grouped.get(x, Fraction(0)) + c
    lo_sum, hi_sum = Fraction(0), Fraction(0)
    for x, c in grouped.items():
        lo, hi = pow_bounds(x, e, bits)
        lo_sum += c * lo
        hi_sum += c * hi
    return lo_sum, hi_sum


def sum_pow_less(
    terms: Sequence[tuple[Fraction, Fraction]], e, bound, max_bits: int = 1024
) -> tuple[bool, Fraction, Fraction]:
    """Decide ``sum(c * x**e) < bound`` exactly.

    Precision is doubled until the enclosure separates from ``bound``.  Returns
    ``(verdict, lo, hi)`` with the final enclosure.  A sum that is exactly
    rational collapses to ``lo == hi`` and is decided immediately.
    """
    bound = as_fraction(bound)
    terms = list(terms)
    bits = 64
    while True:
        lo, hi = sum_pow_bounds(terms, e, bits)
        if hi < bound:
            return True, lo, hi
        if lo >= bound:
            return False, lo, hi
        if bits >= max_bits:
            raise ArithmeticError(
                f"could not separate sum from {bound} at {bits} bits of precision"
            )
        bits *= 2
