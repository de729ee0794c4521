"""Deterministic 64-bit seed derivation.

Every cell of a sweep gets its own seed, computed from the master seed and
the cell key by chaining SplitMix64 finalizers. A cell can therefore be
re-run in isolation, and results never depend on execution order.
"""

from __future__ import annotations

import zlib

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One SplitMix64 step: add the golden gamma, then finalize."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _encode(key) -> int:
    # floats are keyed at 1e-9 resolution so 0.1 + 0.2 and 0.3 collide on purpose
    if isinstance(key, bool):
        return int(key)
    if isinstance(key, int):
        return key & MASK64
    if isinstance(key, float):
        return round(key * 1_000_000_000) & MASK64
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    raise TypeError(f"cannot derive a seed from {type(key).__name__}")


def derive_seed(master_seed: int, *keys) -> int:
    """Mix ``master_seed`` with each key in turn; returns an unsigned 64-bit int."""
    h = splitmix64(master_seed & MASK64)
    for key in keys:
        h = splitmix64(h ^ _encode(key))
    return h
