"""Integer search-space encoding: genotype layout, validation, sampling.

An architecture is a 32-gene integer string over four stages:

    genes[0:4]    stage depths, each in 0..6
    genes[4:28]   expansion-ratio indices, 6 per stage, each in 0..2
    genes[28:32]  stage width indices, each in 0..2

Expansion genes at cell positions >= the stage depth are inactive; the
canonical form zeroes them so equal phenotypes share one genotype key.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateArchitecture, DomainError, ShapeError

NUM_STAGES = 4
MAX_DEPTH = 6
GENOME_LENGTH = 32

DEPTH_SLICE = slice(0, 4)
EXPANSION_SLICE = slice(4, 28)
WIDTH_SLICE = slice(28, 32)

# Phenotype values the indices map to (only the indices matter to the suite).
EXPANSION_RATIOS = (2, 4, 6)
WIDTH_MULTIPLIERS = (1.0, 1.25, 1.5)


@dataclass(frozen=True)
class SearchSpace:
    """Fixed description of the 32-gene integer search space."""

    num_stages: int = NUM_STAGES
    max_depth_per_stage: int = MAX_DEPTH
    genome_length: int = GENOME_LENGTH

    @property
    def depth_max(self) -> int:
        return self.max_depth_per_stage

    @property
    def expansion_max(self) -> int:
        return len(EXPANSION_RATIOS) - 1

    @property
    def width_max(self) -> int:
        return len(WIDTH_MULTIPLIERS) - 1


SPACE = SearchSpace()


def bounds():
    """Per-gene inclusive (lower, upper) bounds as int arrays of length 32."""
    lower = np.zeros(GENOME_LENGTH, dtype=np.int64)
    upper = np.empty(GENOME_LENGTH, dtype=np.int64)
    upper[DEPTH_SLICE] = SPACE.depth_max
    upper[EXPANSION_SLICE] = SPACE.expansion_max
    upper[WIDTH_SLICE] = SPACE.width_max
    return lower, upper


def as_genes(g) -> np.ndarray:
    """Coerce a genotype to an int64 array, checking only its length."""
    genes = np.asarray(g, dtype=np.int64)
    if genes.shape != (GENOME_LENGTH,):
        raise ShapeError(f"genotype must have {GENOME_LENGTH} genes, got shape {genes.shape}")
    return genes


def stage_depth(genes: np.ndarray, stage: int) -> int:
    return int(genes[stage])


def stage_expansions(genes: np.ndarray, stage: int) -> np.ndarray:
    start = 4 + MAX_DEPTH * stage
    return genes[start:start + MAX_DEPTH]


def stage_width(genes: np.ndarray, stage: int) -> int:
    return int(genes[28 + stage])


def validate(g) -> np.ndarray:
    """Check domains and the no-empty-network rule; return the gene array.

    Raises DomainError for an out-of-domain gene and DegenerateArchitecture
    when every stage depth is zero.
    """
    genes = as_genes(g)
    lower, upper = bounds()
    bad = np.nonzero((genes < lower) | (genes > upper))[0]
    if bad.size:
        pos = int(bad[0])
        raise DomainError(pos, int(genes[pos]))
    if not np.any(genes[DEPTH_SLICE] > 0):
        raise DegenerateArchitecture("all stage depths are zero")
    return genes


def is_valid(g) -> bool:
    try:
        validate(g)
    except (DomainError, DegenerateArchitecture, ShapeError):
        return False
    return True


def canonicalize(g) -> np.ndarray:
    """Zero every inactive expansion gene (cell index >= stage depth).

    Idempotent; active genes are untouched. Validates its input first.
    """
    genes = validate(g).copy()
    for s in range(NUM_STAGES):
        depth = stage_depth(genes, s)
        start = 4 + MAX_DEPTH * s
        genes[start + depth:start + MAX_DEPTH] = 0
    return genes


def sample_random(n: int, seed: int) -> list:
    """Draw n valid canonical genotypes, genes uniform over their domains.

    All-zero-depth draws are rejected and resampled, so the returned
    genotypes always pass validate(). Deterministic for a fixed seed.
    """
    return sample_with_rng(n, np.random.default_rng(np.random.SeedSequence(seed)))


def sample_with_rng(n: int, rng: np.random.Generator) -> list:
    if n < 1:
        raise ValueError("n must be >= 1")
    lower, upper = bounds()
    out = []
    while len(out) < n:
        genes = rng.integers(lower, upper + 1, dtype=np.int64)
        if not np.any(genes[DEPTH_SLICE] > 0):
            continue
        out.append(canonicalize(genes))
    return out


def to_json_list(g) -> list:
    """Genotype wire format: a plain JSON array of 32 integers."""
    return [int(v) for v in as_genes(g)]
