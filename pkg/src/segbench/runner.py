"""Experiment orchestration: config, evaluator setup, run records, resume."""
from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import algorithms, encoding, lut, problems, surrogate
from .directions import population_size
from .errors import IoError

DATA_DIR_ENV = "SEGBENCH_DATA_DIR"
DEFAULT_TABLE_SEED = 0
DEFAULT_TRAIN_SEED = 0
DEFAULT_TRAIN_PAIRS = 2048


def data_dir(override=None) -> Path:
    if override:
        return Path(override)
    return Path(os.environ.get(DATA_DIR_ENV, "segbench-data"))


def ensure_evaluators(directory=None, perturb: bool = True,
                      train_pairs: int = DEFAULT_TRAIN_PAIRS,
                      train_cfg: surrogate.TrainingConfig = None) -> problems.Evaluators:
    """Load the cost table and surrogate from the data dir, creating the
    synthetic defaults (and caching them) when absent."""
    d = data_dir(directory)
    d.mkdir(parents=True, exist_ok=True)
    table_path = d / "cost_table.json"
    model_path = d / "surrogate.json"
    if table_path.exists():
        table = lut.CostTable.load(table_path)
    else:
        table = lut.generate_synthetic_table(DEFAULT_TABLE_SEED)
        table.save(table_path)
    if model_path.exists():
        model = surrogate.SurrogateModel.load(model_path)
    else:
        model, report = train_surrogate(table, n_pairs=train_pairs,
                                        seed=DEFAULT_TRAIN_SEED, cfg=train_cfg)
        model.save(model_path)
        with open(d / "surrogate_report.json", "w") as fh:
            json.dump(report, fh, indent=1)
    return problems.Evaluators(table, model, perturb=perturb)


def train_surrogate(table: lut.CostTable, n_pairs: int = DEFAULT_TRAIN_PAIRS,
                    seed: int = DEFAULT_TRAIN_SEED,
                    cfg: surrogate.TrainingConfig = None):
    genotypes = encoding.sample_random(n_pairs, seed)
    errors = surrogate.synthetic_error_batch(genotypes, seed=seed, table=table)
    return surrogate.train(list(zip(genotypes, errors)), cfg, seed=seed)


@dataclass
class ExperimentConfig:
    problems: list = field(default_factory=lambda: list(problems.PROBLEM_IDS))
    algorithms: list = field(default_factory=lambda: list(algorithms.ALGORITHMS))
    runs: int = 31
    evaluations: int = 10_000
    seed_base: int = 0
    perturb: bool = True
    jobs: int = 1
    output_dir: Path = Path("segbench-out")
    data_dir: Path = None

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        self.output_dir = Path(self.output_dir)
        largest_n = max(population_size(problems.get_problem(p).M)[0]
                        for p in self.problems)
        if self.evaluations < largest_n:
            raise ValueError(f"evaluations {self.evaluations} below the largest "
                             f"population size {largest_n}")


def record_path(cfg: ExperimentConfig, pid: int, algo: str, run_index: int) -> Path:
    return cfg.output_dir / "records" / f"p{pid:02d}_{algo}_run{run_index:03d}.jsonl"


def write_record(path: Path, record: algorithms.RunRecord, run_index: int):
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w") as fh:
        for g in record.generations:
            fh.write(json.dumps(g, sort_keys=True) + "\n")
        fh.write(json.dumps({
            "final": True,
            "problem": record.problem_id,
            "algorithm": record.algorithm,
            "seed": record.seed,
            "run_index": run_index,
            "genotypes": record.final_genotypes,
            "front": record.final_front,
            "duration": record.duration,
        }, sort_keys=True) + "\n")
    os.replace(tmp, path)


def read_record(path: Path) -> dict:
    """Parse one JSONL record file: {'generations': [...], 'final': {...}}."""
    generations = []
    final = None
    with open(path) as fh:
        for line in fh:
            obj = json.loads(line)
            if obj.get("final"):
                final = obj
            else:
                generations.append(obj)
    if final is None:
        raise IoError(f"record {path} has no final line (incomplete run)")
    return {"generations": generations, "final": final}


def is_complete(path: Path) -> bool:
    if not path.exists():
        return False
    try:
        read_record(path)
    except (IoError, json.JSONDecodeError):
        return False
    return True


def _execute_one(args):
    pid, algo, run_index, seed, evaluations, perturb, data_directory, out_path = args
    ev = ensure_evaluators(data_directory, perturb=perturb)
    problem = problems.get_problem(pid)
    record = algorithms.run(algo, problem, ev, budget=evaluations, seed=seed)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_record(out_path, record, run_index)
    return str(out_path)


def run_experiment(cfg: ExperimentConfig, log=None) -> dict:
    """Run every (problem, algorithm, run) triple, skipping completed ones,
    then build and persist the summary. Returns the summary dict."""
    log = log or (lambda msg: None)
    try:
        (cfg.output_dir / "records").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create output dir {cfg.output_dir}: {exc}") from exc
    # materialize evaluators once up front so workers only load from disk
    ensure_evaluators(cfg.data_dir, perturb=cfg.perturb)

    tasks = []
    for pid in cfg.problems:
        for algo in cfg.algorithms:
            for k in range(cfg.runs):
                path = record_path(cfg, pid, algo, k)
                if is_complete(path):
                    log(f"skip completed {path.name}")
                    continue
                tasks.append((pid, algo, k, cfg.seed_base + k, cfg.evaluations,
                              cfg.perturb, cfg.data_dir, path))

    t0 = time.perf_counter()
    if cfg.jobs > 1 and tasks:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            for name in pool.map(_execute_one, tasks):
                log(f"done {Path(name).name}")
    else:
        for task in tasks:
            name = _execute_one(task)
            log(f"done {Path(name).name}")
    log(f"{len(tasks)} runs executed in {time.perf_counter() - t0:.1f}s")

    from .reporting import build_summary, write_summary
    summary = build_summary(cfg)
    write_summary(cfg.output_dir, summary)
    return summary
