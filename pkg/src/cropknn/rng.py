"""Deterministic random number generation.

A SplitMix64 generator is used for all sampling decisions (undersampling,
fold shuffles) so runs are reproducible bit-for-bit across platforms and
independent of numpy version. Streams for distinct purposes are derived
from the master seed by mixing in string labels, so parallel execution
cannot perturb any sampling sequence.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1


class SplitMix64:
    """64-bit SplitMix generator (Steele et al. fast-splittable PRNG)."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), rejection-sampled to avoid modulo bias."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = _MASK - (_MASK + 1) % n
        while True:
            u = self.next_u64()
            if u <= limit:
                return u % n


def derive_seed(master: int, *labels) -> int:
    """Derive an independent stream seed from the master seed and labels."""
    state = SplitMix64(master).next_u64()
    for label in labels:
        for byte in str(label).encode("utf-8"):
            state = SplitMix64(state ^ byte).next_u64()
    return state


def shuffled(items, rng: SplitMix64) -> list:
    """Fisher-Yates shuffle; returns a new list."""
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        j = rng.below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out
