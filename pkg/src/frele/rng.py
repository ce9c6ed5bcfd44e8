"""Portable seeded random numbers.

The generator is xorshift64* (Marsaglia shift register, multiplier
0x2545F4914F6CDD1D, shifts 12/25/27), seeded through one round of splitmix64
so that small or zero seeds still give a well-mixed nonzero state. Floats take
the top 53 bits of each output. Normals use the Box-Muller transform, one
normal per pair of uniforms (the sine branch is discarded). Shuffles are
Fisher-Yates from the last index down.

Everything is written against that description only, so the streams can be
reproduced bit-for-bit by any other implementation that follows it.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_MULT = 0x2545F4914F6CDD1D


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class XorShift64Star:
    def __init__(self, seed: int):
        state = splitmix64(int(seed) & _MASK)
        self._state = state or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        s = self._state
        s ^= s >> 12
        s ^= (s << 25) & _MASK
        s ^= s >> 27
        self._state = s
        return (s * _MULT) & _MASK

    def random(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def uniform(self, low: float, high: float, size=None):
        if size is None:
            return low + (high - low) * self.random()
        n = int(np.prod(size))
        u = np.fromiter((self.random() for _ in range(n)), dtype=float, count=n)
        return (low + (high - low) * u).reshape(size)

    def normal(self, size=None, loc: float = 0.0, scale: float = 1.0):
        def one() -> float:
            u1 = 1.0 - self.random()  # (0, 1]
            u2 = self.random()
            return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

        if size is None:
            return loc + scale * one()
        n = int(np.prod(size))
        z = np.fromiter((one() for _ in range(n)), dtype=float, count=n)
        return (loc + scale * z).reshape(size)

    def integer(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def permutation(self, n: int) -> np.ndarray:
        idx = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.integer(i + 1)
            idx[i], idx[j] = idx[j], idx[i]
        return np.asarray(idx, dtype=np.int64)

