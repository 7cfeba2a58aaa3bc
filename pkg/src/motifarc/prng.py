"""Deterministic pseudo-randomness: splitmix64 and derived streams.

All randomness in the pipeline flows from a single 64-bit seed through
splitmix64, so every artifact is bit-reproducible across runs, platforms
and worker counts. Substreams are derived by XOR-ing a context ordinal
into the seed, never from scheduling order.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def prng_next(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (new_state, output), bit-exact."""
    state = (state + GOLDEN) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    z = z ^ (z >> 31)
    return state, z


def splitmix_words(seed: int, count: int) -> np.ndarray:
    """First `count` outputs of the splitmix64 stream started at `seed`.

    Vectorized: state after i steps is seed + (i+1)*GOLDEN mod 2^64, so the
    whole stream mixes in one shot.
    """
    with np.errstate(over="ignore"):
        idx = np.arange(1, count + 1, dtype=np.uint64)
        z = np.uint64(seed & MASK64) + idx * np.uint64(GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z = z ^ (z >> np.uint64(31))
    return z


def derive_seed(seed: int, ordinal: int) -> int:
    """Substream seed for a numbered context (oligo, block, round...)."""
    return prng_next((seed ^ (ordinal & MASK64)) & MASK64)[1]


class Stream:
    """Stateful splitmix64 stream with small sampling helpers.

    Cheap to construct; one per read/oligo is the intended granularity.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state, out = prng_next(self.state)
        return out

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n) (modulo bias negligible for n << 2^64)."""
        return self.next_u64() % n

    def gauss(self, mu: float, sigma: float) -> float:
        """One normal deviate via Box-Muller (cos branch).

        Uses libm through the math module so the compiled kernels reproduce
        the exact same doubles.
        """
        u1 = self.random()
        u2 = self.random()
        while u1 <= 1e-300:
            u1 = self.random()
            u2 = self.random()
        r = math.sqrt(-2.0 * math.log(u1))
        return mu + sigma * (r * math.cos(2.0 * math.pi * u2))

    def lognormal(self, sigma: float) -> float:
        return math.exp(self.gauss(0.0, sigma))

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_indices(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n), order of first appearance."""
        if k > n:
            raise ValueError("sample larger than population")
        seen: set[int] = set()
        out: list[int] = []
        while len(out) < k:
            v = self.randrange(n)
            if v not in seen:
                seen.add(v)
                out.append(v)
        return out
