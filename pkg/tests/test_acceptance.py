"""Suite-level acceptance checks, one test per shipping criterion.

Each test prints a single [PASS]/[FAIL] line naming the criterion it
guards; run with -s (or read captured output) to see them.
"""
import json
from contextlib import contextmanager

import numpy as np
import pytest
from scipy import stats

from segbench import (algorithms, cli, directions, encoding, indicators, lut,
                      problems, runner, surrogate)

from test_indicators import exhaustive_rank_sum_p, hv_inclusion_exclusion


@contextmanager
def criterion(name):
    try:
        yield
    except Exception:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}")


@pytest.fixture(scope="module")
def full_model(table):
    """Surrogate trained at full strength: 2,048 pairs, default epochs."""
    model, report = runner.train_surrogate(table, n_pairs=2048, seed=0)
    return model, report


@pytest.fixture(scope="module")
def acceptance_data_dir(tmp_path_factory, table, full_model):
    d = tmp_path_factory.mktemp("acceptance-data")
    table.save(d / "cost_table.json")
    full_model[0].save(d / "surrogate.json")
    return d


def test_registry_fidelity():
    with criterion("registry fidelity: 15 problems, D=32, M sequence, "
                   "objective lists, exact normalization bounds"):
        assert problems.PROBLEM_IDS == tuple(range(1, 16))
        m_sequence = [problems.get_problem(i).M for i in problems.PROBLEM_IDS]
        assert m_sequence == [2, 3, 3, 4, 5, 2, 3, 3, 4, 5, 3, 5, 6, 6, 7]
        for pid in problems.PROBLEM_IDS:
            p = problems.get_problem(pid)
            assert p.D == 32
            assert p.objectives[0] == problems.ERROR
            assert p.bounds[0] == 1.0
        bounds = problems.NORMALIZATION_BOUNDS
        assert bounds[lut.LATENCY_H1] == 1.9741
        assert bounds[lut.LATENCY_H2] == 58.7465
        assert bounds[lut.ENERGY_H1] == 678.0692
        assert bounds[lut.ENERGY_H2] == 734.3339
        assert bounds[lut.FLOPS] == 3.3107e8
        assert bounds[lut.PARAMS] == 1.3251e5


def test_population_sizing():
    with criterion("population sizing: N = 100/105/120/126/132/217 for "
                   "M=2..7 with matching direction counts"):
        expected = {2: 100, 3: 105, 4: 120, 5: 126, 6: 132, 7: 217}
        for m, n in expected.items():
            assert directions.population_size(m)[0] == n
            assert len(directions.directions_for(m)) == n
        # the (3,2) layering for M=7 would undershoot; (4,1) is in use
        assert directions.direction_count(7, 3, 2) == 112
        assert directions.direction_count(7, 4, 1) == 217


def test_lut_exactness(table):
    with criterion("LUT exactness: compose_cost error exactly 0 vs the "
                   "brute-force unit-sum oracle (1,000 genotypes)"):
        genotypes = encoding.sample_random(1000, 99)
        for metric in (lut.FLOPS, lut.PARAMS):
            batch = lut.compose_batch(genotypes, metric, table)
            for i, g in enumerate(genotypes):
                oracle = table.stem_cost(metric) + table.tail_cost(metric)
                for s in range(4):
                    for c in range(int(g[s])):
                        oracle += table.unit_cost(s, int(g[28 + s]),
                                                  int(g[4 + 6 * s + c]), metric)
                assert lut.compose_cost(g, metric, table) - oracle == 0.0
                assert batch[i] - oracle == 0.0


def test_perturbation_bounds(table, quick_model):
    with criterion("perturbation bounds: 1e5 latency/energy ratios inside "
                   "[0.95,1.05]/[0.98,1.02]; --no-perturb bit-identical"):
        ev = problems.Evaluators(table, quick_model, perturb=True)
        ev_off = problems.Evaluators(table, quick_model, perturb=False)
        p = problems.get_problem(15)
        checked = 0
        for start in range(0, 25_000, 5_000):
            gs = encoding.sample_random(5_000, start + 1)
            raw, _ = problems.evaluate_batch(p, gs, ev, seed=7,
                                             counter_start=start)
            base, _ = problems.evaluate_batch(p, gs, ev_off, seed=7)
            for j, kind in enumerate(p.objectives):
                r = lut.perturbation_range(kind)
                if r.low == 1.0 and r.high == 1.0:
                    continue
                ratios = raw[:, j] / base[:, j]
                assert np.all(ratios >= r.low) and np.all(ratios <= r.high)
                checked += len(ratios)
        assert checked >= 100_000
        gs = encoding.sample_random(100, 0)
        again, _ = problems.evaluate_batch(p, gs, ev_off, seed=7)
        base, _ = problems.evaluate_batch(p, gs, ev_off, seed=7)
        assert np.array_equal(again, base)


def test_surrogate_quality_gate(full_model, table):
    with criterion("surrogate quality: held-out Pearson >= 0.95 and "
                   "Spearman >= 0.95 on 2,048 oracle pairs; gradient check "
                   "within 1e-4 of central differences"):
        model, report = full_model
        assert report["pearson"] >= 0.95
        assert report["spearman"] >= 0.95

        gs = encoding.sample_random(16, 5)
        X = surrogate.featurize(gs)
        y = surrogate.synthetic_error_batch(gs, seed=0, table=table)
        gw, _ = surrogate.loss_gradients(model, X, y, 0.05)
        rng = np.random.default_rng(11)
        h = 1e-6
        checked = 0
        while checked < 10:
            li = int(rng.integers(0, len(model.weights)))
            r = int(rng.integers(0, model.weights[li].shape[0]))
            c = int(rng.integers(0, model.weights[li].shape[1]))
            orig = model.weights[li][r, c]
            model.weights[li][r, c] = orig + h
            hi = model.forward(X)
            model.weights[li][r, c] = orig - h
            lo = model.forward(X)
            model.weights[li][r, c] = orig
            if not np.array_equal(np.argsort(hi, kind="stable"),
                                  np.argsort(lo, kind="stable")):
                continue  # rank-term kink between the probe points
            fd = (surrogate.loss(hi, y, 0.05)[0] - surrogate.loss(lo, y, 0.05)[0]) / (2 * h)
            an = gw[li][r, c]
            assert abs(fd - an) / max(abs(fd), abs(an), 1e-8) < 1e-4
            checked += 1


def test_indicator_oracles(rng):
    with criterion("indicator oracles: exact HV vs inclusion-exclusion "
                   "(<=1e-12); MC HV within 3 SE; sorting vs O(n^2 M) "
                   "oracle; rank-sum within 15% of the permutation oracle"):
        for _ in range(20):
            F = rng.random((8, 2))
            assert indicators.hypervolume_exact(F, np.ones(2)) == pytest.approx(
                hv_inclusion_exclusion(F, np.ones(2)), abs=1e-12)

        F3 = rng.random((20, 3))
        exact = indicators.hypervolume_exact(F3, np.ones(3))
        est, se = indicators.hypervolume_mc(F3, np.ones(3), seed=1)
        assert abs(est - exact) <= 3 * se

        for m in (2, 5, 7):
            F = rng.random((200, m))
            got = [sorted(f.tolist()) for f in indicators.fast_nondominated_sort(F)]
            remaining = list(range(200))
            expected = []
            while remaining:
                layer = [i for i in remaining
                         if not any(indicators.dominates(F[j], F[i])
                                    for j in remaining if j != i)]
                expected.append(sorted(layer))
                remaining = [i for i in remaining if i not in set(layer)]
            assert got == expected

        x = np.asarray([1.0, 2, 3, 4, 5])
        y = np.asarray([6.0, 7, 8, 9, 10])
        p, _ = indicators.rank_sum_test(x, y)
        oracle = exhaustive_rank_sum_p(x, y)
        assert abs(p - oracle) / oracle < 0.15


@pytest.fixture(scope="module")
def end_to_end(tmp_path_factory, acceptance_data_dir):
    out = tmp_path_factory.mktemp("acceptance-exp")
    cfg = runner.ExperimentConfig(problems=[1, 6, 15],
                                  algorithms=list(algorithms.ALGORITHMS),
                                  runs=5, evaluations=2000, seed_base=0,
                                  jobs=1, output_dir=out,
                                  data_dir=acceptance_data_dir)
    summary = runner.run_experiment(cfg)
    return cfg, summary


def test_end_to_end_benchmark(end_to_end):
    with criterion("end-to-end: 6 algorithms x problems {1,6,15} x 5 runs x "
                   "2,000 evaluations; non-dominated finals; HV in (0,1]; "
                   "one BEST per problem; tabular report layout"):
        cfg, summary = end_to_end
        for pid in cfg.problems:
            for algo in cfg.algorithms:
                for k in range(cfg.runs):
                    rec = runner.read_record(runner.record_path(cfg, pid, algo, k))
                    assert rec["generations"][-1]["evals"] == 2000
                    front = np.asarray(rec["final"]["front"])
                    assert np.all(indicators.nondominated_mask(front))
                    for g in rec["generations"]:
                        assert 0.0 < g["hv"] <= 1.0
            labels = [summary["hypervolume"][str(pid)][a]["label"]
                      for a in cfg.algorithms]
            assert labels.count(indicators.BEST) == 1
            for lbl in labels:
                assert lbl in (indicators.BEST, indicators.TIE, indicators.WORST)

        text = (cfg.output_dir / "summary.txt").read_text()
        lines = text.splitlines()
        assert lines[0].split() == ["Problem"] + list(cfg.algorithms)
        assert [ln.split()[0] for ln in lines[2:]] == ["MOP1", "MOP6", "MOP15"]
        for ln in lines[2:]:  # each cell shows "mean (std)" with a label mark
            assert ln.count("(") == len(cfg.algorithms)


def test_throughput(acceptance_data_dir):
    with criterion("throughput: 100 architectures evaluated in mean < 2.0 s "
                   "single-threaded"):
        ev = runner.ensure_evaluators(acceptance_data_dir)
        mean, _ = cli.bench_eval(15, 100, 31, ev, seed=0)
        assert mean < 2.0


def test_determinism(tmp_path_factory, acceptance_data_dir):
    with criterion("determinism: identical ExperimentConfig runs produce "
                   "byte-identical summaries"):
        kwargs = dict(problems=[1, 15], algorithms=list(algorithms.ALGORITHMS),
                      runs=3, evaluations=500, seed_base=0, jobs=1,
                      data_dir=acceptance_data_dir)
        summaries = []
        for label in ("a", "b"):
            out = tmp_path_factory.mktemp(f"det-{label}")
            runner.run_experiment(runner.ExperimentConfig(output_dir=out, **kwargs))
            summaries.append((out / "summary.json").read_bytes())
        assert summaries[0] == summaries[1]
        json.loads(summaries[0])  # and they are well-formed
