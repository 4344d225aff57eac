"""Detection-probability estimation helpers."""

from __future__ import annotations

import math

# Two-sided 95% normal quantile.
Z_95 = 1.959963984540054


def wilson_interval(k: int, n: int, z: float = Z_95) -> tuple[float, float]:
    """Wilson score interval for k successes in n Bernoulli draws.

    Returns (low, high), both clipped to [0, 1]. The lower bound is exactly
    0 when k = 0 and the upper exactly 1 when k = n.
    """
    if n <= 0:
        raise ValueError(f"need at least one observation, got n={n}")
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside [0, {n}]")
    p = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2.0 * n)) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n))
    # center - half is exactly 0 when k = 0 (and center + half exactly 1 when
    # k = n) only in real arithmetic; pin the degenerate bounds explicitly.
    low = 0.0 if k == 0 else max(0.0, center - half)
    high = 1.0 if k == n else min(1.0, center + half)
    return low, high
