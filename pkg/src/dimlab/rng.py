"""Portable seedable random numbers: xoshiro256** seeded through splitmix64.

Both algorithms are the public-domain designs of Blackman and Vigna.  The
stream is fully determined by the 64-bit seed, so any implementation that
follows the same recipe reproduces it bit for bit:

* state words ``s0..s3`` are four successive splitmix64 outputs from ``seed``;
* ``random()`` is ``(next_u64() >> 11) * 2**-53``;
* ``normal()`` is Box-Muller on two uniforms, using ``1 - u1`` so the
  logarithm never sees zero, and returns the cosine branch only.
"""
from __future__ import annotations

import math

MASK64 = (1 << 64) - 1
VERSION = "xoshiro256**/splitmix64 v1"


def splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256:
    def __init__(self, seed: int):
        sm = int(seed) & MASK64
        words = []
        for _ in range(4):
            sm, z = splitmix64(sm)
            words.append(z)
        self.s = words

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in ``[lo, hi]`` by rejection (no modulo bias)."""
        span = hi - lo + 1
        if span <= 0:
            raise ValueError("empty range")
        limit = (1 << 64) - ((1 << 64) % span)
        while True:
            v = self.next_u64()
            if v < limit:
                return lo + v % span

    def normal(self) -> float:
        u1 = self.random()
        u2 = self.random()
        return math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)

    def sign(self) -> int:
        return 1 if self.next_u64() >> 63 else -1

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(0, i)
            items[i], items[j] = items[j], items[i]
