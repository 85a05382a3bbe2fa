"""Deterministic pseudo-randomness used for splits and synthetic corpora.

The generator is SplitMix64, chosen because the whole protocol fits in a dozen
lines and can be reimplemented independently from its published constants:

    state  = (state + 0x9E3779B97F4A7C15) mod 2^64
    z      = state
    z      = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
    z      = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2^64
    output = z ^ (z >> 31)

`below(n)` draws 64-bit values and rejects those >= 2^64 - (2^64 mod n) to
avoid modulo bias; `shuffle` is a Fisher-Yates pass from the last index down.
This exact protocol is part of the split contract (see docs/formats.md):
the same seed must produce the same fold assignment on any platform.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        if not 0 <= seed <= _MASK:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self._state = seed

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError("below() needs a positive bound")
        bound = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < bound:
                return r % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle, last index down to 1."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def apportion(total: int, fractions: list[float]) -> list[int]:
    """Split `total` into integer parts proportional to `fractions`.

    Largest-remainder method: floor each share, then hand out the remaining
    units to the largest fractional parts (ties broken by list position).
    Guarantees |part - fraction * total| <= 1 for every part.
    """
    base = [int(f * total) for f in fractions]
    remainders = [f * total - b for f, b in zip(fractions, base)]
    short = total - sum(base)
    order = sorted(range(len(fractions)), key=lambda i: (-remainders[i], i))
    for i in order[:short]:
        base[i] += 1
    return base
