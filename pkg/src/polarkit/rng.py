"""Pinned deterministic generator used for every seeded shuffle and draw.

SplitMix64 is tiny, has a published reference algorithm, and gives the same
stream on every platform, so splits and samples are reproducible without
depending on a library's stream-compatibility policy.

Streams are keyed by a tuple (e.g. ``(seed, lang, label)``); the key is hashed
with SHA-256 and the first 8 bytes (big-endian) become the initial state.
"""

from __future__ import annotations

import hashlib
from typing import MutableSequence, Sequence, TypeVar

T = TypeVar("T")

_MASK = (1 << 64) - 1


def derive_seed(*parts: object) -> int:
    key = "|".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


class SplitMix64:
    def __init__(self, state: int):
        self.state = state & _MASK

    @classmethod
    def keyed(cls, *parts: object) -> "SplitMix64":
        return cls(derive_seed(*parts))

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection sampling (no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = ((1 << 64) // n) * n
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def shuffle(self, items: MutableSequence[T]) -> None:
        """In-place Fisher-Yates, walking from the last index down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, items: Sequence[T], k: int) -> list[T]:
        """First ``k`` elements of a Fisher-Yates shuffle of ``items``."""
        pool = list(items)
        self.shuffle(pool)
        return pool[:k]

    def choice(self, items: Sequence[T]) -> T:
        return items[self.below(len(items))]
