"""FNV-1a 64-bit hashing for feature buckets and model-file checksums.

Standard constants (offset basis 0xCBF29CE484222325, prime 0x100000001B3).
Feature hashing mixes a caller seed into the offset basis by XOR so different
models can decorrelate their bucket assignments.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes, seed: int = 0) -> int:
    h = FNV_OFFSET ^ (seed & _MASK)
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK
    return h
