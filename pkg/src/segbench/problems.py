"""Registry of the fifteen benchmark problem instances.

Each instance picks an ordered subset of the seven objectives (error
first, always), carries per-objective normalization bounds, and evaluates
genotype batches through the LUT and surrogate evaluators. Hypervolume is
taken in normalized space against the all-ones reference point.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import encoding, lut, surrogate
from .errors import EvaluatorUnavailable, ShapeError, UnknownProblem

ERROR = "error"

# Objective kinds in wire order names; all minimized.
OBJECTIVE_KINDS = (ERROR,) + lut.METRICS

# Normalization bounds: the appendix reference values for the LUT metrics,
# 1.0 for the error objective (its natural range).
NORMALIZATION_BOUNDS = {ERROR: 1.0, **lut.DEFAULT_SCALE_TARGETS}


@dataclass(frozen=True)
class ProblemInstance:
    id: int
    objectives: tuple

    @property
    def M(self) -> int:
        return len(self.objectives)

    @property
    def D(self) -> int:
        return encoding.GENOME_LENGTH

    @property
    def bounds(self) -> np.ndarray:
        return np.asarray([NORMALIZATION_BOUNDS[k] for k in self.objectives])

    def to_json_obj(self) -> dict:
        return {"id": self.id, "D": self.D, "M": self.M,
                "objectives": list(self.objectives),
                "bounds": [float(b) for b in self.bounds]}


_E, _F, _P = ERROR, lut.FLOPS, lut.PARAMS
_L1, _L2, _N1, _N2 = lut.LATENCY_H1, lut.LATENCY_H2, lut.ENERGY_H1, lut.ENERGY_H2

_REGISTRY_ROWS = {
    1: (_E, _L1),
    2: (_E, _L1, _F),
    3: (_E, _L1, _P),
    4: (_E, _L1, _N1, _F),
    5: (_E, _L1, _N1, _F, _P),
    6: (_E, _L2),
    7: (_E, _L2, _F),
    8: (_E, _L2, _P),
    9: (_E, _L2, _N2, _F),
    10: (_E, _L2, _N2, _F, _P),
    11: (_E, _L1, _L2),
    12: (_E, _L1, _L2, _N1, _N2),
    13: (_E, _L1, _L2, _N1, _N2, _F),
    14: (_E, _L1, _L2, _N1, _N2, _P),
    15: (_E, _L1, _L2, _N1, _N2, _F, _P),
}

REGISTRY = {pid: ProblemInstance(pid, objs) for pid, objs in _REGISTRY_ROWS.items()}
PROBLEM_IDS = tuple(sorted(REGISTRY))


def get_problem(pid: int) -> ProblemInstance:
    try:
        return REGISTRY[int(pid)]
    except (KeyError, TypeError, ValueError):
        raise UnknownProblem(f"problem id must be in 1..15, got {pid!r}") from None


def registry_json() -> list:
    return [REGISTRY[i].to_json_obj() for i in PROBLEM_IDS]


def normalize(p: ProblemInstance, values) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    if v.shape[-1] != p.M:
        raise ShapeError(f"expected {p.M} objective values, got shape {v.shape}")
    return v / p.bounds


def reference_point(p: ProblemInstance) -> np.ndarray:
    """HV reference in normalized space: the all-ones point."""
    return np.ones(p.M)


class Evaluators:
    """Bundle of the two fitness evaluators plus perturbation switch."""

    def __init__(self, table: lut.CostTable, model: surrogate.SurrogateModel,
                 perturb: bool = True):
        self.table = table
        self.model = model
        self.perturb = perturb


def _eval_rng(seed: int, eval_id: int) -> np.random.Generator:
    # One RNG stream per (run seed, evaluation counter): full replayability.
    return np.random.default_rng(np.random.SeedSequence([0xBE7A, int(seed), int(eval_id)]))


def evaluate_batch(p: ProblemInstance, genotypes, ev: Evaluators,
                   seed: int = 0, counter_start: int = 0):
    """Evaluate a batch; returns (raw, normalized) arrays of shape (n, M).

    Error comes from the surrogate, FLOPs/params from the LUT exactly, and
    latency/energy from the LUT with a fresh beta perturbation per
    evaluation (keyed by seed and the running evaluation counter).
    """
    if ev.table is None:
        raise EvaluatorUnavailable("lut")
    if ev.model is None:
        raise EvaluatorUnavailable(ERROR)
    genes = [encoding.validate(g) for g in genotypes]
    n = len(genes)
    raw = np.empty((n, p.M))
    columns = {}
    for j, kind in enumerate(p.objectives):
        if kind == ERROR:
            columns[j] = surrogate.predict_batch(ev.model, genes)
        else:
            columns[j] = lut.compose_batch(genes, kind, ev.table)
    for j in range(p.M):
        raw[:, j] = columns[j]
    if ev.perturb:
        for i in range(n):
            rng = _eval_rng(seed, counter_start + i)
            for j, kind in enumerate(p.objectives):
                r = lut.perturbation_range(kind)
                if r.low < 1.0 or r.high > 1.0:
                    raw[i, j] = lut.perturb(raw[i, j], r, rng)
    return raw, raw / p.bounds
