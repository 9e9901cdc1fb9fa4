"""Portable seeded random number generation.

All experiment randomness flows through :class:`PortableRng`, an
xoshiro256** generator seeded through splitmix64 (public-domain constants
by Blackman & Vigna).  A fixed algorithm, rather than whatever numpy's
``Generator`` happens to ship, keeps ensembles byte-for-byte reproducible
across library versions and across reimplementations in other languages.

Gaussian variates use the polar Box-Muller transform with an explicit
spare so that draw order is part of the contract.
"""

from __future__ import annotations

import math

_MASK = 0xFFFFFFFFFFFFFFFF


def _splitmix64(state: int):
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, (z ^ (z >> 31)) & _MASK


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


class PortableRng:
    """xoshiro256** stream with deterministic helpers.

    Parameters
    ----------
    seed : int
        Any Python integer; reduced mod 2^64 and expanded with splitmix64.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        s = self.seed & _MASK
        state = []
        for _ in range(4):
            s, v = _splitmix64(s)
            state.append(v)
        if not any(state):  # all-zero state is invalid for xoshiro
            state[0] = 1
        self._s = state
        self._spare = None

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK, 7) * 9) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def uniform(self, n: int | None = None):
        """Uniform float64 in [0, 1) with 53-bit resolution."""
        if n is None:
            return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)
        return _as_array([self.uniform() for _ in range(n)])

    def standard_normal(self, n: int | None = None):
        if n is None:
            if self._spare is not None:
                z, self._spare = self._spare, None
                return z
            while True:
                u = 2.0 * self.uniform() - 1.0
                v = 2.0 * self.uniform() - 1.0
                s = u * u + v * v
                if 0.0 < s < 1.0:
                    break
            factor = math.sqrt(-2.0 * math.log(s) / s)
            self._spare = v * factor
            return u * factor
        return _as_array([self.standard_normal() for _ in range(n)])

    def integers(self, low: int, high: int, n: int | None = None):
        """Uniform integers in [low, high) by rejection-free modular draw.

        The tiny modulo bias (< 2^-40 for ranges below 2^24) is irrelevant
        for index shuffling but the draw sequence must stay fixed, so no
        rejection loop.
        """
        span = high - low
        if span <= 0:
            raise ValueError("empty integer range")
        if n is None:
            return low + self.next_u64() % span
        return [low + self.next_u64() % span for _ in range(n)]

    def spawn(self, tag: int) -> "PortableRng":
        """Derive an independent stream for a labelled sub-experiment."""
        return PortableRng((self.seed ^ (0xA5A5A5A5A5A5A5A5 + tag * 0x9E3779B97F4A7C15)) & _MASK)


def _as_array(values):
    import numpy as np

    return np.asarray(values, dtype=np.float64)
