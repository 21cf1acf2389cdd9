"""Shared integer variation: SBX crossover, polynomial mutation, repair.

Real-coded operators run on the gene values, children are rounded to the
nearest integer and clipped to the per-gene bounds, and any all-zero-depth
child is repaired by switching one random depth gene to 1 before the
canonical form is restored.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import encoding


@dataclass(frozen=True)
class VariationConfig:
    crossover_prob: float = 0.9
    crossover_eta: float = 20.0
    mutation_prob: float = 1.0 / encoding.GENOME_LENGTH
    mutation_eta: float = 20.0

    def __post_init__(self):
        if not (0.0 <= self.crossover_prob <= 1.0 and 0.0 <= self.mutation_prob <= 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        if self.crossover_eta <= 0 or self.mutation_eta <= 0:
            raise ValueError("distribution indices must be positive")


DEFAULT_VARIATION = VariationConfig()


def sbx_pair(p1: np.ndarray, p2: np.ndarray, cfg: VariationConfig,
             rng: np.random.Generator):
    """Simulated binary crossover on one parent pair (real-valued output)."""
    c1 = p1.astype(np.float64).copy()
    c2 = p2.astype(np.float64).copy()
    if rng.random() > cfg.crossover_prob:
        return c1, c2
    for i in range(len(c1)):
        if rng.random() > 0.5 or c1[i] == c2[i]:
            continue
        x1, x2 = min(c1[i], c2[i]), max(c1[i], c2[i])
        u = rng.random()
        if u <= 0.5:
            beta = (2 * u) ** (1.0 / (cfg.crossover_eta + 1))
        else:
            beta = (1.0 / (2 * (1 - u))) ** (1.0 / (cfg.crossover_eta + 1))
        a = 0.5 * ((x1 + x2) - beta * (x2 - x1))
        b = 0.5 * ((x1 + x2) + beta * (x2 - x1))
        if rng.random() < 0.5:
            c1[i], c2[i] = a, b
        else:
            c1[i], c2[i] = b, a
    return c1, c2


def polynomial_mutation(child: np.ndarray, cfg: VariationConfig,
                        rng: np.random.Generator) -> np.ndarray:
    lower, upper = encoding.bounds()
    x = child.astype(np.float64).copy()
    for i in range(len(x)):
        if rng.random() >= cfg.mutation_prob:
            continue
        lo, hi = float(lower[i]), float(upper[i])
        if hi <= lo:
            continue
        xi = min(max(x[i], lo), hi)
        d1 = (xi - lo) / (hi - lo)
        d2 = (hi - xi) / (hi - lo)
        u = rng.random()
        mpow = 1.0 / (cfg.mutation_eta + 1)
        if u < 0.5:
            val = 2 * u + (1 - 2 * u) * (1 - d1) ** (cfg.mutation_eta + 1)
            delta = val ** mpow - 1.0
        else:
            val = 2 * (1 - u) + 2 * (u - 0.5) * (1 - d2) ** (cfg.mutation_eta + 1)
            delta = 1.0 - val ** mpow
        x[i] = xi + delta * (hi - lo)
    return x


def repair(genes: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Round, clip to bounds, fix all-zero depths, canonicalize."""
    lower, upper = encoding.bounds()
    g = np.clip(np.rint(genes).astype(np.int64), lower, upper)
    if not np.any(g[encoding.DEPTH_SLICE] > 0):
        g[int(rng.integers(0, encoding.NUM_STAGES))] = 1
    return encoding.canonicalize(g)


def make_offspring(parents, n_offspring: int, cfg: VariationConfig,
                   rng: np.random.Generator):
    """Produce n_offspring valid canonical children from a parent pool."""
    out = []
    idx = np.arange(len(parents))
    while len(out) < n_offspring:
        i, j = rng.choice(idx, size=2, replace=len(parents) < 2)
        c1, c2 = sbx_pair(parents[i], parents[j], cfg, rng)
        for c in (c1, c2):
            if len(out) >= n_offspring:
                break
            out.append(repair(polynomial_mutation(c, cfg, rng), rng))
    return out
