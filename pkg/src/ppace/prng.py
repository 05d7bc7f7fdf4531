"""Portable deterministic pseudo-random generator.

SplitMix64 (Steele, Lea & Flood 2014): a 64-bit state advanced by the golden
gamma 0x9E3779B97F4B7C15, output mixed with two xor-shift-multiply rounds.
The initial state is the seed itself (no pre-mixing; seeding conventions vary
between libraries, so this one is pinned here). Chosen because the algorithm
fits in ten lines, is fully specified here, and reproduces bit-for-bit in any
language, so committed reference traces stay valid outside this codebase.
Not for cryptographic use.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4B7C15) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection sampling (no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def coin(self) -> bool:
        return bool(self.next_u64() & 1)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, iterating from the last index down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, items: list, k: int) -> list:
        """First k elements of a Fisher-Yates shuffle of a copy (no replacement)."""
        if k > len(items):
            raise ValueError(f"cannot sample {k} from {len(items)} items")
        pool = list(items)
        self.shuffle(pool)
        return pool[:k]
