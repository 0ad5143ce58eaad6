"""Portable 64-bit linear congruential generator.

Seeded benchmark instances are drawn from this generator rather than from
numpy so that the same seed yields the same instance in any language.

    state_{n+1} = (A * state_n + C) mod 2**64
    A = 6364136223846793005, C = 1442695040888963407   (Knuth, MMIX)

The initial state is ``seed`` itself, advanced once before the first draw.
Uniform doubles take the top 53 bits: ``(state >> 11) * 2**-53``.
"""

from __future__ import annotations

import math

import numpy as np

LCG_A = 6364136223846793005
LCG_C = 1442695040888963407
_MASK = (1 << 64) - 1


class LCG64:
    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (LCG_A * self.state + LCG_C) & _MASK
        return self.state

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        u = (self.next_u64() >> 11) * (1.0 / (1 << 53))
        return lo + (hi - lo) * u

    def uniform_array(self, shape, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        n = int(np.prod(shape))
        return np.array([self.uniform(lo, hi) for _ in range(n)]).reshape(shape)

    def normal(self) -> float:
        # Box-Muller, cosine branch only; one normal per two uniforms.
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)

    def normal_array(self, shape) -> np.ndarray:
        n = int(np.prod(shape))
        return np.array([self.normal() for _ in range(n)]).reshape(shape)
