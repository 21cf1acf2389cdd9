"""Look-up-table evaluation of complexity and hardware objectives.

A whole-architecture metric decomposes into the sum of per-unit costs:
stem + one entry per active cell (keyed by stage, width index, expansion
index) + tail. Hardware metrics (latency, energy) additionally receive a
bounded multiplicative perturbation; FLOPs and parameter counts never do.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import encoding
from .errors import IncompleteTable

# Metric tags. FLOPS/PARAMS are hardware-free; latency/energy carry the
# platform (h1 = desktop GPU, h2 = ARM edge device).
FLOPS = "flops"
PARAMS = "params"
LATENCY_H1 = "latency_h1"
LATENCY_H2 = "latency_h2"
ENERGY_H1 = "energy_h1"
ENERGY_H2 = "energy_h2"

METRICS = (FLOPS, PARAMS, LATENCY_H1, LATENCY_H2, ENERGY_H1, ENERGY_H2)
HARDWARE_PLATFORMS = {"h1": "NVIDIA GeForce RTX 4090", "h2": "Huawei Atlas 200 DK"}

LATENCY_METRICS = (LATENCY_H1, LATENCY_H2)
ENERGY_METRICS = (ENERGY_H1, ENERGY_H2)


@dataclass(frozen=True)
class PerturbationRange:
    """Multiplicative noise bounds for one hardware metric family."""

    low: float
    high: float

    def __post_init__(self):
        if not (0.0 < self.low <= 1.0 <= self.high):
            raise ValueError(f"need 0 < low <= 1 <= high, got [{self.low}, {self.high}]")


# Latency fluctuates more than energy on real devices.
LATENCY_PERTURBATION = PerturbationRange(0.95, 1.05)
ENERGY_PERTURBATION = PerturbationRange(0.98, 1.02)
NO_PERTURBATION = PerturbationRange(1.0, 1.0)


def perturbation_range(metric: str) -> PerturbationRange:
    if metric in LATENCY_METRICS:
        return LATENCY_PERTURBATION
    if metric in ENERGY_METRICS:
        return ENERGY_PERTURBATION
    return NO_PERTURBATION


# Calibration targets: composed cost of the maximum genotype (all depths 6,
# all widths/expansions at their top index) per metric.
DEFAULT_SCALE_TARGETS = {
    FLOPS: 3.3107e8,
    PARAMS: 1.3251e5,
    LATENCY_H1: 1.9741,
    LATENCY_H2: 58.7465,
    ENERGY_H1: 678.0692,
    ENERGY_H2: 734.3339,
}


class CostTable:
    """Immutable per-unit cost table for all six metrics.

    units[metric] is a (stages, widths, expansions) array; stem/tail are
    per-metric constants.
    """

    def __init__(self, units: dict, stem: dict, tail: dict):
        for m in METRICS:
            if m not in units or m not in stem or m not in tail:
                raise IncompleteTable(m)
            arr = np.asarray(units[m], dtype=np.float64)
            expected = (encoding.NUM_STAGES, encoding.SPACE.width_max + 1,
                        encoding.SPACE.expansion_max + 1)
            if arr.shape != expected:
                raise IncompleteTable((m, arr.shape))
            if np.any(arr < 0) or stem[m] < 0 or tail[m] < 0:
                raise ValueError(f"negative cost in table for metric {m}")
        self._units = {m: np.asarray(units[m], dtype=np.float64).copy() for m in METRICS}
        self._stem = {m: float(stem[m]) for m in METRICS}
        self._tail = {m: float(tail[m]) for m in METRICS}
        for m in self._units.values():
            m.setflags(write=False)

    def unit_cost(self, stage: int, width: int, expansion: int, metric: str) -> float:
        try:
            return float(self._units[metric][stage, width, expansion])
        except (KeyError, IndexError):
            raise IncompleteTable((stage, width, expansion, metric)) from None

    def stem_cost(self, metric: str) -> float:
        try:
            return self._stem[metric]
        except KeyError:
            raise IncompleteTable(("stem", metric)) from None

    def tail_cost(self, metric: str) -> float:
        try:
            return self._tail[metric]
        except KeyError:
            raise IncompleteTable(("tail", metric)) from None

    def units_array(self, metric: str) -> np.ndarray:
        return self._units[metric]

    # -- serialization (exact round-trip) --------------------------------

    def to_json_obj(self) -> dict:
        units = []
        for m in METRICS:
            arr = self._units[m]
            for s in range(arr.shape[0]):
                for w in range(arr.shape[1]):
                    for e in range(arr.shape[2]):
                        units.append({"stage": s, "width": w, "expansion": e,
                                      "metric": m, "cost": float(arr[s, w, e])})
        return {"stem": dict(self._stem), "tail": dict(self._tail), "units": units}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "CostTable":
        shape = (encoding.NUM_STAGES, encoding.SPACE.width_max + 1,
                 encoding.SPACE.expansion_max + 1)
        units = {m: np.full(shape, np.nan) for m in METRICS}
        for entry in obj["units"]:
            units[entry["metric"]][entry["stage"], entry["width"], entry["expansion"]] = entry["cost"]
        for m, arr in units.items():
            missing = np.argwhere(np.isnan(arr))
            if missing.size:
                s, w, e = (int(v) for v in missing[0])
                raise IncompleteTable((s, w, e, m))
        return cls(units, obj["stem"], obj["tail"])

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_obj(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "CostTable":
        with open(path) as fh:
            return cls.from_json_obj(json.load(fh))


def compose_cost(g, metric: str, table: CostTable) -> float:
    """Sum stem + active unit costs + tail for one genotype. No perturbation."""
    genes = encoding.validate(g)
    total = table.stem_cost(metric) + table.tail_cost(metric)
    units = table.units_array(metric)
    for s in range(encoding.NUM_STAGES):
        depth = encoding.stage_depth(genes, s)
        width = encoding.stage_width(genes, s)
        exps = encoding.stage_expansions(genes, s)[:depth]
        for e in exps:
            total += units[s, width, int(e)]
    return float(total)


def compose_batch(genotypes, metric: str, table: CostTable) -> np.ndarray:
    """compose_cost over a list of genotypes, vectorized per stage."""
    G = np.asarray([encoding.as_genes(g) for g in genotypes], dtype=np.int64)
    n = G.shape[0]
    units = table.units_array(metric)
    total = np.full(n, table.stem_cost(metric) + table.tail_cost(metric))
    for s in range(encoding.NUM_STAGES):
        depth = G[:, s]
        width = G[:, 28 + s]
        exps = G[:, 4 + encoding.MAX_DEPTH * s: 4 + encoding.MAX_DEPTH * (s + 1)]
        # accumulate cell by cell so the addition order (and therefore the
        # float result) matches the sequential per-unit sum exactly
        for i in range(encoding.MAX_DEPTH):
            total += units[s][width, exps[:, i]] * (i < depth)
    return total


def perturb(base: float, r: PerturbationRange, rng: np.random.Generator) -> float:
    """base * beta with beta ~ U[r.low, r.high] drawn from rng."""
    if base < 0:
        raise ValueError("base cost must be non-negative")
    return float(base * rng.uniform(r.low, r.high))


# Relative stage weights per metric. FLOPs (and with it the hardware
# metrics) are dominated by the last stage, which yields the clustered,
# multi-peak metric distributions over random architectures: sampling a
# zero depth for stage 3 drops the architecture into a far cheaper regime.
_STAGE_FACTORS = {
    FLOPS: (1.0, 2.0, 4.0, 600.0),
    PARAMS: (1.0, 2.0, 4.0, 8.0),
    LATENCY_H1: (1.0, 2.0, 4.0, 300.0),
    LATENCY_H2: (1.0, 2.5, 5.0, 400.0),
    ENERGY_H1: (1.0, 2.0, 4.0, 350.0),
    ENERGY_H2: (1.0, 2.0, 4.5, 450.0),
}


def generate_synthetic_table(seed: int, scale_targets: dict | None = None) -> CostTable:
    """Deterministic stand-in table calibrated to the reference maxima.

    unit_cost = stage_factor * (1 + w/4)^2 * ratio_e * jitter, then every
    entry is rescaled so the maximum genotype composes exactly to the
    metric's scale target. Jitter stays within +-5%, small enough to keep
    costs strictly increasing in width and expansion indices.
    """
    targets = dict(DEFAULT_SCALE_TARGETS)
    if scale_targets:
        targets.update(scale_targets)
    for m, v in targets.items():
        if v <= 0:
            raise ValueError(f"scale target for {m} must be positive")
    rng = np.random.default_rng(np.random.SeedSequence([0x5EB, seed]))
    n_w = encoding.SPACE.width_max + 1
    n_e = encoding.SPACE.expansion_max + 1
    width_factor = (1.0 + np.arange(n_w) / 4.0) ** 2
    ratio = np.asarray(encoding.EXPANSION_RATIOS, dtype=np.float64)

    units, stem, tail = {}, {}, {}
    for m in METRICS:
        stage = np.asarray(_STAGE_FACTORS[m])
        base = stage[:, None, None] * width_factor[None, :, None] * ratio[None, None, :]
        jitter = 1.0 + 0.05 * rng.random(base.shape)
        raw = base * jitter
        raw_stem = 0.02 * float(np.sum(raw[:, -1, -1]) * encoding.MAX_DEPTH)
        raw_tail = 0.01 * float(np.sum(raw[:, -1, -1]) * encoding.MAX_DEPTH)
        raw_max = raw_stem + raw_tail + float(np.sum(raw[:, -1, -1]) * encoding.MAX_DEPTH)
        scale = targets[m] / raw_max
        units[m] = raw * scale
        stem[m] = raw_stem * scale
        tail[m] = raw_tail * scale
    return CostTable(units, stem, tail)


def max_genotype() -> np.ndarray:
    """The most expensive architecture: all depths 6, top width/expansion."""
    genes = np.zeros(encoding.GENOME_LENGTH, dtype=np.int64)
    genes[encoding.DEPTH_SLICE] = encoding.SPACE.depth_max
    genes[encoding.EXPANSION_SLICE] = encoding.SPACE.expansion_max
    genes[encoding.WIDTH_SLICE] = encoding.SPACE.width_max
    return genes


def min_genotype() -> np.ndarray:
    """The cheapest valid architecture: a single minimal cell in stage 0."""
    genes = np.zeros(encoding.GENOME_LENGTH, dtype=np.int64)
    genes[0] = 1
    return genes
