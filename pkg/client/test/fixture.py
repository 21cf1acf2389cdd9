"""Seed an evaluator data dir and print reference evaluations as JSON.

Usage: python3 fixture.py DATA_DIR

Writes cost_table.json and surrogate.json into DATA_DIR (small, fast
training — the protocol tests only need a working evaluator, not a
high-accuracy one), then prints, for problems 1 and 15, 100 random
genotypes and their in-process batch evaluations with seed 123.
"""
import json
import sys
from pathlib import Path

from segbench import encoding, lut, problems, runner, surrogate


def main() -> int:
    data_dir = Path(sys.argv[1])
    data_dir.mkdir(parents=True, exist_ok=True)
    table_path = data_dir / "cost_table.json"
    model_path = data_dir / "surrogate.json"
    if table_path.exists():
        table = lut.CostTable.load(table_path)
    else:
        table = lut.generate_synthetic_table(0)
        table.save(table_path)
    if model_path.exists():
        model = surrogate.SurrogateModel.load(model_path)
    else:
        cfg = surrogate.TrainingConfig(epochs=40)
        model, _ = runner.train_surrogate(table, n_pairs=512, seed=0, cfg=cfg)
        model.save(model_path)

    ev = problems.Evaluators(table, model, perturb=True)
    out = {}
    for pid, sample_seed in ((1, 21), (15, 22)):
        p = problems.get_problem(pid)
        genotypes = encoding.sample_random(100, sample_seed)
        raw, norm = problems.evaluate_batch(p, genotypes, ev, seed=123)
        out[str(pid)] = {
            "X": [encoding.to_json_list(g) for g in genotypes],
            "F": [[float(v) for v in row] for row in norm],
            "F_raw": [[float(v) for v in row] for row in raw],
        }
    json.dump(out, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
