"""segbench: a hardware-aware NAS multi-objective benchmark suite.

Fifteen problem instances over a 32-gene integer architecture space,
evaluated by a per-unit cost table (FLOPs, parameters, latency, energy)
and a trained error surrogate, with six reference MOEAs and hypervolume
plus rank-sum reporting.
"""

from .algorithms import ALGORITHMS, RunRecord, run
from .encoding import bounds, canonicalize, sample_random, validate
from .indicators import dominates, hypervolume, label_table, rank_sum_test
from .lut import CostTable, compose_cost, generate_synthetic_table, perturb
from .problems import Evaluators, evaluate_batch, get_problem, normalize, reference_point
from .surrogate import SurrogateModel, loss, miou, predict, synthetic_error_oracle, train

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS", "RunRecord", "run",
    "bounds", "canonicalize", "sample_random", "validate",
    "dominates", "hypervolume", "label_table", "rank_sum_test",
    "CostTable", "compose_cost", "generate_synthetic_table", "perturb",
    "Evaluators", "evaluate_batch", "get_problem", "normalize", "reference_point",
    "SurrogateModel", "loss", "miou", "predict", "synthetic_error_oracle", "train",
    "__version__",
]
