import math

import numpy as np
import pytest

from segbench import algorithms, directions, encoding, problems, variation
from segbench.errors import (SelectionUnderflow, UnknownAlgorithm,
                             UnsupportedObjectiveCount)
from segbench.indicators import dominates, nondominated_mask


class TestPopulationSizes:
    @pytest.mark.parametrize("m,n", [(2, 100), (3, 105), (4, 120),
                                     (5, 126), (6, 132), (7, 217)])
    def test_table(self, m, n):
        assert directions.population_size(m)[0] == n

    def test_unsupported(self):
        for bad in (1, 8, "x", None):
            with pytest.raises(UnsupportedObjectiveCount):
                directions.population_size(bad)

    @pytest.mark.parametrize("m", [2, 3, 4, 5, 6, 7])
    def test_direction_counts_match_population(self, m):
        n, h1, h2 = directions.population_size(m)
        dirs = directions.directions_for(m)
        assert len(dirs) == n
        assert directions.direction_count(m, h1, h2) == n

    def test_seven_objective_layering_disagrees_with_312(self):
        # a (3, 2) two-layer lattice would give only 112 vectors; the
        # (4, 1) layering reproduces the published size 217
        assert directions.direction_count(7, 3, 2) == 112
        assert directions.direction_count(7, 4, 1) == 217


class TestDasDennis:
    def test_rows_sum_to_one(self):
        for m in range(2, 8):
            dirs = directions.directions_for(m)
            assert np.allclose(dirs.sum(axis=1), 1.0, atol=1e-12)
            assert np.all(dirs >= 0.0)

    def test_simple_lattice(self):
        dirs = directions.das_dennis(2, 4)
        expected = np.asarray([[0, 4], [1, 3], [2, 2], [3, 1], [4, 0]]) / 4.0
        assert np.allclose(np.sort(dirs, axis=0), np.sort(expected, axis=0))

    def test_lattice_count_formula(self):
        assert len(directions.das_dennis(3, 13)) == math.comb(15, 2)

    def test_inner_layer_shrinks_to_centroid(self):
        dirs = directions.das_dennis(3, 1, 1)
        inner = dirs[3:]  # outer layer has C(3,2) = 3 vectors
        # v/2 + 1/(2M) keeps inner points away from the simplex boundary
        assert np.all(inner >= 1.0 / 6 - 1e-12)
        assert np.allclose(inner.sum(axis=1), 1.0)

    def test_rejects_bad_h1(self):
        with pytest.raises(ValueError):
            directions.das_dennis(3, 0)

    def test_unique_vectors(self):
        for m in (2, 7):
            dirs = directions.directions_for(m)
            assert len(np.unique(dirs, axis=0)) == len(dirs)


class TestVariation:
    def test_offspring_valid_and_canonical(self, rng):
        parents = encoding.sample_random(20, 0)
        children = variation.make_offspring(parents, 50,
                                            variation.DEFAULT_VARIATION, rng)
        assert len(children) == 50
        for c in children:
            encoding.validate(c)
            assert np.array_equal(c, encoding.canonicalize(c))

    def test_repair_fixes_all_zero_depths(self, rng):
        g = np.zeros(32, dtype=np.float64)
        fixed = variation.repair(g, rng)
        assert fixed[0:4].sum() == 1

    def test_repair_rounds_and_clips(self, rng):
        g = np.full(32, 9.7)
        fixed = variation.repair(g, rng)
        lower, upper = encoding.bounds()
        assert np.all(fixed >= lower) and np.all(fixed <= upper)

    def test_sbx_respects_probability_zero(self, rng):
        cfg = variation.VariationConfig(crossover_prob=0.0)
        p1 = encoding.sample_random(1, 1)[0].astype(np.float64)
        p2 = encoding.sample_random(1, 2)[0].astype(np.float64)
        c1, c2 = variation.sbx_pair(p1, p2, cfg, rng)
        assert np.array_equal(c1, p1) and np.array_equal(c2, p2)

    def test_bad_config(self):
        with pytest.raises(ValueError):
            variation.VariationConfig(crossover_prob=1.5)
        with pytest.raises(ValueError):
            variation.VariationConfig(mutation_eta=0.0)


class TestSelection:
    def test_nsga2_keeps_first_front_when_it_fits(self, rng):
        good = rng.random((5, 2)) * 0.1
        bad = rng.random((10, 2)) * 0.1 + 0.8
        F = np.vstack([good, bad])
        keep = algorithms.nsga2_select(F, 8)
        assert set(range(5)) <= set(keep.tolist())

    def test_crowding_boundary_infinite(self, rng):
        F = np.sort(rng.random((10, 1)), axis=0)
        F = np.hstack([F, 1.0 - F])
        dist = algorithms.crowding_distance(F)
        assert dist[0] == np.inf and dist[-1] == np.inf
        assert np.all(np.isfinite(dist[1:-1]))

    def test_underflow(self, rng):
        F = rng.random((5, 2))
        with pytest.raises(SelectionUnderflow):
            algorithms.nsga2_select(F, 6)
        with pytest.raises(SelectionUnderflow):
            algorithms.ibea_select(F, 6)
        with pytest.raises(SelectionUnderflow):
            algorithms.hype_select(F, 6, np.ones(2), 0)
        with pytest.raises(SelectionUnderflow):
            algorithms.nsga3_select(F, 6, directions.directions_for(2), rng)

    def test_hype_2d_contributions_match_slow_oracle(self, rng):
        # truncation always runs inside one nondominated front, so the
        # oracle comparison uses one too
        from segbench.indicators import hypervolume_exact

        F = rng.random((30, 2))
        F = np.unique(F[nondominated_mask(F)], axis=0)
        ref = np.ones(2)
        got = algorithms._hv_contributions(F, ref, seed=0)
        total = hypervolume_exact(F, ref)
        for i in range(len(F)):
            want = total - hypervolume_exact(np.delete(F, i, axis=0), ref)
            assert got[i] == pytest.approx(want, abs=1e-12)

    def test_ibea_select_prefers_nondominated(self, rng):
        good = rng.random((6, 2)) * 0.05
        bad = good + 0.9
        keep = algorithms.ibea_select(np.vstack([good, bad]), 6)
        assert set(keep.tolist()) == set(range(6))

    def test_rvea_one_survivor_per_vector(self, rng):
        F = rng.random((50, 3))
        vectors = directions.das_dennis(3, 4)
        keep, used = algorithms.rvea_select(F, vectors, F.min(axis=0), 0.5)
        assert len(keep) == used.sum()
        assert len(set(keep.tolist())) == len(keep)

    def test_tchebycheff_at_ideal_is_zero(self):
        ideal = np.asarray([0.1, 0.2])
        assert algorithms.tchebycheff(ideal, np.asarray([0.5, 0.5]), ideal) == 0.0


class TestRun:
    def test_unknown_algorithm(self, evaluators):
        with pytest.raises(UnknownAlgorithm):
            algorithms.run("spea2", problems.get_problem(1), evaluators, 200, 0)

    def test_budget_below_population(self, evaluators):
        with pytest.raises(ValueError):
            algorithms.run("nsga2", problems.get_problem(1), evaluators, 50, 0)

    @pytest.mark.parametrize("algo", algorithms.ALGORITHMS)
    def test_each_algorithm_runs_clean(self, algo, evaluators):
        p = problems.get_problem(1)
        rec = algorithms.run(algo, p, evaluators, budget=250, seed=0)
        # budget accounting: ceil(250/100) = 3 generations, truncated last
        assert [g["evals"] for g in rec.generations] == [100, 200, 250]
        front = np.asarray(rec.final_front)
        assert front.shape[1] == 2
        assert np.all(nondominated_mask(front))
        for g in rec.final_genotypes:
            encoding.validate(g)
        for g in rec.generations:
            assert 0.0 < g["hv"] <= 1.0

    def test_run_deterministic(self, evaluators):
        p = problems.get_problem(6)
        a = algorithms.run("nsga2", p, evaluators, budget=300, seed=4)
        b = algorithms.run("nsga2", p, evaluators, budget=300, seed=4)
        assert a.final_front == b.final_front
        assert a.final_genotypes == b.final_genotypes
        assert [g["hv"] for g in a.generations] == [g["hv"] for g in b.generations]

    def test_seed_changes_outcome(self, evaluators):
        p = problems.get_problem(1)
        a = algorithms.run("nsga2", p, evaluators, budget=300, seed=0)
        b = algorithms.run("nsga2", p, evaluators, budget=300, seed=1)
        assert a.final_front != b.final_front

    def test_moead_on_seven_objectives(self, evaluators):
        p = problems.get_problem(15)
        rec = algorithms.run("moead", p, evaluators, budget=300, seed=0)
        assert rec.generations[0]["evals"] == 217
        assert rec.generations[-1]["evals"] == 300
        assert np.asarray(rec.final_front).shape[1] == 7

    def test_final_front_mutually_nondominated(self, evaluators):
        p = problems.get_problem(11)
        for algo in ("nsga3", "hype"):
            rec = algorithms.run(algo, p, evaluators, budget=250, seed=2)
            front = rec.final_front
            for i, a in enumerate(front):
                for j, b in enumerate(front):
                    if i != j:
                        assert not dominates(a, b)

    def test_hv_trace_property(self, evaluators):
        rec = algorithms.run("ibea", problems.get_problem(1), evaluators,
                             budget=200, seed=0)
        assert rec.hv_trace == [g["hv"] for g in rec.generations]
