"""Deterministic pseudo-random stream used everywhere randomness is needed.

A single fixed update rule (SplitMix64) drives table generation, flat-source
sampling and randomized test instances, so identical seeds reproduce identical
artifacts on every platform. The constants are pinned in the machine
definition file; changing them is a version change.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


def mix64(value: int) -> int:
    """One SplitMix64 finalization round of a 64-bit value."""
    z = value & MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *tags: int) -> int:
    """Derive a child seed from a parent seed and integer tags."""
    state = seed & MASK64
    for tag in tags:
        state = mix64((state + GAMMA + (tag & MASK64)) & MASK64)
    return state


class Rng:
    """SplitMix64 stream with helpers for bounded and bit-level draws."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + GAMMA) & MASK64
        return mix64(self._state)

    def bits(self, nbits: int) -> int:
        """nbits uniform bits as an integer (MSB drawn first)."""
        if nbits < 0:
            raise ValueError("nbits must be >= 0")
        out = 0
        remaining = nbits
        while remaining > 0:
            take = min(remaining, 64)
            out = (out << take) | (self.next_u64() >> (64 - take))
            remaining -= take
        return out

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection (unbiased)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        nbits = (bound - 1).bit_length()
        if bound == 1:
            return 0
        while True:
            candidate = self.bits(nbits)
            if candidate < bound:
                return candidate

    def sample_distinct(self, count: int, bound: int) -> tuple[int, ...]:
        """count distinct integers from [0, bound), returned sorted."""
        if count > bound:
            raise ValueError("cannot sample more distinct values than the range holds")
        if count * 2 >= bound:
            pool = list(range(bound))
            for i in range(bound - 1, 0, -1):
                j = self.below(i + 1)
                pool[i], pool[j] = pool[j], pool[i]
            return tuple(sorted(pool[:count]))
        seen: set[int] = set()
        while len(seen) < count:
            seen.add(self.below(bound))
        return tuple(sorted(seen))
