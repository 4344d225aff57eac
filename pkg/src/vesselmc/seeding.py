"""Deterministic 64-bit seed derivation for trial streams.

Trial i of a batch draws from a PCG64 generator seeded with
mix64(master_seed, i). The mixer is SplitMix64's finalizer applied to
master_seed advanced i+1 times by the golden-gamma increment, so nearby
(master, index) pairs land far apart in seed space and the mapping is
stable across platforms.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def mix64(master_seed: int, index: int) -> int:
    """Derive the stream seed for a given master seed and trial index."""
    if index < 0:
        raise ValueError(f"index must be >= 0, got {index}")
    z = (master_seed + (index + 1) * _GOLDEN_GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK
