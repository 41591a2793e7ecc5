"""Cantor pairing, used for the equivalence-class carrier layout and for
the repeat slots of rich sequences."""
from __future__ import annotations

import math


def cantor_pair(a: int, b: int) -> int:
    s = a + b
    return s * (s + 1) // 2 + b


def cantor_unpair(z: int) -> tuple[int, int]:
    s = (math.isqrt(8 * z + 1) - 1) // 2
    b = z - s * (s + 1) // 2
    return s - b, b
