"""Simplex-lattice reference directions and the population-size table."""
from __future__ import annotations

from math import comb

import numpy as np

from .errors import UnsupportedObjectiveCount

# (H1, H2) lattice parameters per objective count. The M=7 row uses (4, 1):
# C(10,6) + C(7,6) = 217, which matches the published population size
# (a (3,2) layering would only give 112 vectors).
POPULATION_TABLE = {
    2: (100, 99, 0),
    3: (105, 13, 0),
    4: (120, 7, 0),
    5: (126, 5, 0),
    6: (132, 4, 1),
    7: (217, 4, 1),
}


def population_size(M: int):
    """(N, H1, H2) for M objectives in 2..7."""
    try:
        return POPULATION_TABLE[int(M)]
    except (KeyError, ValueError, TypeError):
        raise UnsupportedObjectiveCount(f"M must be in 2..7, got {M!r}") from None


def direction_count(M: int, H1: int, H2: int) -> int:
    n = comb(H1 + M - 1, M - 1)
    if H2 > 0:
        n += comb(H2 + M - 1, M - 1)
    return n


def _simplex_lattice(M: int, H: int) -> np.ndarray:
    """All compositions of H into M parts, divided by H."""
    points = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            points.append(prefix + [remaining])
            return
        for v in range(remaining + 1):
            rec(prefix + [v], remaining - v, slots - 1)

    rec([], H, M)
    return np.asarray(points, dtype=np.float64) / H


def das_dennis(M: int, H1: int, H2: int = 0) -> np.ndarray:
    """Two-layer simplex-lattice directions, each row summing to 1.

    The inner (H2) layer is shrunk halfway toward the simplex centroid:
    v -> v/2 + 1/(2M).
    """
    if H1 < 1:
        raise ValueError("H1 must be >= 1")
    outer = _simplex_lattice(M, H1)
    if H2 > 0:
        inner = _simplex_lattice(M, H2) / 2.0 + 1.0 / (2 * M)
        return np.vstack([outer, inner])
    return outer


def directions_for(M: int) -> np.ndarray:
    """Reference directions sized per the population table."""
    _, h1, h2 = population_size(M)
    return das_dennis(M, h1, h2)
