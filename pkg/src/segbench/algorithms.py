"""The six benchmarked optimizers over integer genotypes.

All algorithms share the same generational accounting: N initial
evaluations, then up to N offspring per generation until the evaluation
budget is spent exactly. Selection operates on normalized objectives;
hypervolume per generation uses the all-ones reference point.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import encoding, problems, variation
from .directions import directions_for, population_size
from .errors import SelectionUnderflow, UnknownAlgorithm
from .indicators import (domination_matrix, fast_nondominated_sort, hypervolume,
                         hypervolume_exact, hypervolume_mc, nondominated_mask)

ALGORITHMS = ("nsga2", "nsga3", "moead", "rvea", "ibea", "hype")

IBEA_KAPPA = 0.05
MOEAD_NEIGHBORS = 20
MOEAD_NEIGHBOR_PROB = 0.9
MOEAD_REPLACE_CAP = 2
RVEA_ALPHA = 2.0
HYPE_MC_SAMPLES = 10_000


@dataclass
class RunRecord:
    problem_id: int
    algorithm: str
    seed: int
    generations: list = field(default_factory=list)  # dicts: gen, evals, front, hv
    final_genotypes: list = field(default_factory=list)
    final_front: list = field(default_factory=list)
    duration: float = 0.0

    @property
    def hv_trace(self):
        return [g["hv"] for g in self.generations]


# -- shared selection machinery ----------------------------------------------

def crowding_distance(F: np.ndarray) -> np.ndarray:
    n, m = F.shape
    dist = np.zeros(n)
    if n <= 2:
        return np.full(n, np.inf)
    for j in range(m):
        order = np.argsort(F[:, j], kind="stable")
        fj = F[order, j]
        dist[order[0]] = dist[order[-1]] = np.inf
        span = fj[-1] - fj[0]
        if span == 0:
            continue
        dist[order[1:-1]] += (fj[2:] - fj[:-2]) / span
    return dist


def nsga2_select(F: np.ndarray, n: int) -> np.ndarray:
    """Fast non-dominated sorting, then crowding-distance truncation."""
    if len(F) < n:
        raise SelectionUnderflow(f"pool {len(F)} < N {n}")
    chosen = []
    for front in fast_nondominated_sort(F):
        if len(chosen) + len(front) <= n:
            chosen.extend(front.tolist())
            if len(chosen) == n:
                break
        else:
            dist = crowding_distance(F[front])
            order = np.argsort(-dist, kind="stable")
            chosen.extend(front[order[:n - len(chosen)]].tolist())
            break
    return np.asarray(chosen, dtype=np.int64)


def _asf_extremes(FT: np.ndarray) -> np.ndarray:
    m = FT.shape[1]
    extremes = np.empty(m, dtype=np.int64)
    for j in range(m):
        w = np.full(m, 1e-6)
        w[j] = 1.0
        extremes[j] = int(np.argmin(np.max(FT / w, axis=1)))
    return extremes


def _nsga3_normalize(F: np.ndarray) -> np.ndarray:
    ideal = F.min(axis=0)
    FT = F - ideal
    extremes = _asf_extremes(FT)
    E = FT[extremes]
    m = F.shape[1]
    intercepts = FT.max(axis=0)
    try:
        coeffs = np.linalg.solve(E, np.ones(m))
        cand = 1.0 / coeffs
        if np.all(np.isfinite(cand)) and np.all(cand > 1e-12):
            intercepts = cand
    except np.linalg.LinAlgError:
        pass
    intercepts = np.where(intercepts > 1e-12, intercepts, 1.0)
    return FT / intercepts


def _associate(FN: np.ndarray, dirs: np.ndarray):
    """Nearest reference line per point: (direction index, perp distance)."""
    norm_d = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    proj = FN @ norm_d.T  # (n, k)
    d2 = np.sum(FN ** 2, axis=1)[:, None] - proj ** 2
    d2 = np.maximum(d2, 0.0)
    dist = np.sqrt(d2)
    idx = np.argmin(dist, axis=1)
    return idx, dist[np.arange(len(FN)), idx]


def nsga3_select(F: np.ndarray, n: int, dirs: np.ndarray,
                 rng: np.random.Generator) -> np.ndarray:
    """Non-dominated sorting followed by reference-point niching."""
    if len(F) < n:
        raise SelectionUnderflow(f"pool {len(F)} < N {n}")
    fronts = fast_nondominated_sort(F)
    chosen = []
    last = None
    for front in fronts:
        if len(chosen) + len(front) <= n:
            chosen.extend(front.tolist())
        else:
            last = front
            break
    if last is None or len(chosen) == n:
        return np.asarray(chosen[:n], dtype=np.int64)

    considered = np.asarray(chosen + last.tolist(), dtype=np.int64)
    FN = _nsga3_normalize(F[considered])
    assoc, dist = _associate(FN, dirs)
    n_chosen = len(chosen)
    niche_count = np.zeros(len(dirs), dtype=np.int64)
    for k in assoc[:n_chosen]:
        niche_count[k] += 1
    pending = {i: (assoc[n_chosen + i], dist[n_chosen + i]) for i in range(len(last))}
    result = list(chosen)
    while len(result) < n:
        live = {k for k, _ in pending.values()}
        counts = {k: niche_count[k] for k in live}
        jmin = min(counts.values())
        cands = sorted(k for k, c in counts.items() if c == jmin)
        k = cands[int(rng.integers(0, len(cands)))]
        members = [i for i, (ak, _) in pending.items() if ak == k]
        if niche_count[k] == 0:
            pick = min(members, key=lambda i: (pending[i][1], i))
        else:
            pick = members[int(rng.integers(0, len(members)))]
        result.append(int(last[pick]))
        niche_count[k] += 1
        del pending[pick]
    return np.asarray(result, dtype=np.int64)


def _eps_indicator_matrix(F: np.ndarray) -> np.ndarray:
    """I[i, j] = additive epsilon by which i must move to weakly dominate j."""
    span = F.max(axis=0) - F.min(axis=0)
    span = np.where(span > 1e-12, span, 1.0)
    FN = (F - F.min(axis=0)) / span
    return np.max(FN[:, None, :] - FN[None, :, :], axis=2)


def ibea_select(F: np.ndarray, n: int, kappa: float = IBEA_KAPPA) -> np.ndarray:
    """Additive epsilon-indicator fitness with iterative worst removal."""
    if len(F) < n:
        raise SelectionUnderflow(f"pool {len(F)} < N {n}")
    I = _eps_indicator_matrix(F)
    c = max(float(np.max(np.abs(I))), 1e-12)
    E = np.exp(-I / (c * kappa))
    np.fill_diagonal(E, 0.0)
    fitness = -E.sum(axis=0)
    alive = np.ones(len(F), dtype=bool)
    for _ in range(len(F) - n):
        idx = np.nonzero(alive)[0]
        worst = idx[int(np.argmin(fitness[idx]))]
        alive[worst] = False
        fitness += E[worst]
    return np.nonzero(alive)[0]


def ibea_fitness(F: np.ndarray, kappa: float = IBEA_KAPPA) -> np.ndarray:
    I = _eps_indicator_matrix(F)
    c = max(float(np.max(np.abs(I))), 1e-12)
    E = np.exp(-I / (c * kappa))
    np.fill_diagonal(E, 0.0)
    return -E.sum(axis=0)


def _hv_contributions(F: np.ndarray, ref: np.ndarray, seed: int) -> np.ndarray:
    """Leave-one-out hypervolume contribution, exact for M <= 3, MC beyond."""
    m = F.shape[1]
    if m == 2:
        return _hv_contributions_2d(F, ref)
    if m == 3:
        total = hypervolume_exact(F, ref)
        out = np.empty(len(F))
        for i in range(len(F)):
            rest = np.delete(F, i, axis=0)
            out[i] = total - hypervolume_exact(rest, ref)
        return out
    dom = _hv_domination_samples(F, ref, seed)
    counts = dom.sum(axis=0)
    exclusive = dom & (counts == 1)[None, :]
    box = float(np.prod(ref))
    return exclusive.sum(axis=1) / HYPE_MC_SAMPLES * box


def _hv_contributions_2d(F: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Exclusive rectangles in one sweep; dominated/duplicate points get 0."""
    out = np.zeros(len(F))
    Fc = np.minimum(F, ref)
    keep = nondominated_mask(Fc)
    _, first = np.unique(Fc, axis=0, return_index=True)
    keep &= np.isin(np.arange(len(F)), first)
    idx = np.nonzero(keep)[0]
    order = idx[np.argsort(Fc[idx, 0], kind="stable")]
    xs = np.append(Fc[order, 0], ref[0])
    ys = np.concatenate([[ref[1]], Fc[order, 1]])
    out[order] = (xs[1:] - xs[:-1]) * (ys[:-1] - ys[1:])
    return out


def _hv_domination_samples(F: np.ndarray, ref: np.ndarray, seed: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([0x117E, seed]))
    samples = rng.random((HYPE_MC_SAMPLES, F.shape[1])) * ref
    dom = np.zeros((len(F), HYPE_MC_SAMPLES), dtype=bool)
    for i, p in enumerate(np.minimum(F, ref)):
        dom[i] = np.all(samples >= p, axis=1)
    return dom


def _hype_truncate(Fpart: np.ndarray, n_keep: int, ref: np.ndarray, seed: int):
    """Greedily drop the smallest leave-one-out contributor until n_keep."""
    alive = list(range(len(Fpart)))
    if Fpart.shape[1] <= 3:
        while len(alive) > n_keep:
            contrib = _hv_contributions(Fpart[alive], ref, seed)
            alive.pop(int(np.argmin(contrib)))
        return alive
    dom = _hv_domination_samples(Fpart, ref, seed)
    counts = dom.sum(axis=0)
    while len(alive) > n_keep:
        sub = dom[alive]
        exclusive = (sub & (counts == 1)[None, :]).sum(axis=1)
        worst = int(np.argmin(exclusive))
        counts -= dom[alive[worst]]
        alive.pop(worst)
    return alive


def hype_select(F: np.ndarray, n: int, ref: np.ndarray, seed: int) -> np.ndarray:
    """Non-dominated sorting with hypervolume-contribution truncation."""
    if len(F) < n:
        raise SelectionUnderflow(f"pool {len(F)} < N {n}")
    chosen = []
    for front in fast_nondominated_sort(F):
        if len(chosen) + len(front) <= n:
            chosen.extend(front.tolist())
            if len(chosen) == n:
                break
        else:
            keep = _hype_truncate(F[front], n - len(chosen), ref, seed)
            chosen.extend(front[keep].tolist())
            break
    return np.asarray(chosen, dtype=np.int64)


def rvea_select(F: np.ndarray, vectors: np.ndarray, ideal: np.ndarray,
                progress: float, alpha: float = RVEA_ALPHA):
    """Angle-penalized-distance selection: at most one survivor per vector.

    Returns (survivor indices, used-vector mask).
    """
    FT = F - ideal
    norms = np.linalg.norm(FT, axis=1)
    V = vectors / np.linalg.norm(vectors, axis=1, keepdims=True)
    cos_vv = np.clip(V @ V.T, -1.0, 1.0)
    np.fill_diagonal(cos_vv, -1.0)
    gamma = np.arccos(np.max(cos_vv, axis=1))
    gamma = np.where(gamma > 1e-12, gamma, 1e-12)

    safe = np.where(norms > 1e-12, norms, 1.0)
    cos_fv = np.clip((FT / safe[:, None]) @ V.T, -1.0, 1.0)
    assign = np.argmax(cos_fv, axis=1)
    theta = np.arccos(cos_fv[np.arange(len(F)), assign])
    m = F.shape[1]
    apd = (1.0 + m * (progress ** alpha) * theta / gamma[assign]) * norms

    survivors = []
    used = np.zeros(len(vectors), dtype=bool)
    for k in range(len(vectors)):
        members = np.nonzero(assign == k)[0]
        if members.size == 0:
            continue
        survivors.append(int(members[np.argmin(apd[members])]))
        used[k] = True
    return np.asarray(sorted(survivors), dtype=np.int64), used


def tchebycheff(F: np.ndarray, weights: np.ndarray, ideal: np.ndarray) -> np.ndarray:
    w = np.maximum(weights, 1e-6)
    return np.max(w * np.abs(F - ideal), axis=-1)


# -- run loop -----------------------------------------------------------------

class _EvalBudget:
    def __init__(self, problem, evaluators, seed, budget):
        self.problem = problem
        self.evaluators = evaluators
        self.seed = seed
        self.budget = budget
        self.used = 0

    def evaluate(self, genotypes) -> np.ndarray:
        if self.used + len(genotypes) > self.budget:
            raise RuntimeError("evaluation budget exceeded")
        _, norm = problems.evaluate_batch(self.problem, genotypes, self.evaluators,
                                          seed=self.seed, counter_start=self.used)
        self.used += len(genotypes)
        return norm


def _record_generation(record: RunRecord, gen: int, evals: int,
                       pop_F: np.ndarray, ref: np.ndarray, hv_seed: int):
    mask = nondominated_mask(pop_F)
    front = pop_F[mask]
    hv = hypervolume(front, ref, seed=hv_seed)
    record.generations.append({
        "gen": gen,
        "evals": evals,
        "front": [[float(v) for v in row] for row in front],
        "hv": float(hv),
    })
    return mask


def _binary_tournament(keys, rng: np.random.Generator) -> int:
    i, j = rng.integers(0, len(keys), size=2)
    return int(i if keys[i] <= keys[j] else j)


def run(algorithm: str, problem, evaluators, budget: int, seed: int,
        var_cfg: variation.VariationConfig = variation.DEFAULT_VARIATION) -> RunRecord:
    """Execute one seeded optimization run; deterministic per inputs."""
    if algorithm not in ALGORITHMS:
        raise UnknownAlgorithm(f"unknown algorithm {algorithm!r}; pick one of {ALGORITHMS}")
    N, _, _ = population_size(problem.M)
    if budget < N:
        raise ValueError(f"budget {budget} smaller than population size {N}")
    start = time.perf_counter()
    rng = np.random.default_rng(np.random.SeedSequence([0x5EED, seed]))
    ev = _EvalBudget(problem, evaluators, seed, budget)
    record = RunRecord(problem.id, algorithm, seed)
    ref = np.ones(problem.M)

    pop = encoding.sample_with_rng(N, rng)
    F = ev.evaluate(pop)
    _record_generation(record, 1, ev.used, F, ref, seed * 1_000_003 + 1)

    if algorithm == "moead":
        pop, F = _moead_loop(problem, ev, pop, F, rng, var_cfg, record, ref, seed)
    else:
        pop, F = _generational_loop(algorithm, problem, ev, pop, F, rng,
                                    var_cfg, record, ref, seed)

    mask = nondominated_mask(F)
    record.final_genotypes = [encoding.to_json_list(pop[i]) for i in np.nonzero(mask)[0]]
    record.final_front = [[float(v) for v in row] for row in F[mask]]
    record.duration = time.perf_counter() - start
    return record


def _generational_loop(algorithm, problem, ev, pop, F, rng, var_cfg,
                       record, ref, seed):
    N = len(pop)
    dirs = directions_for(problem.M)
    base_dirs = dirs.copy()
    total_gens = max(1, int(np.ceil(ev.budget / N)))
    adapt_every = max(1, int(np.ceil(total_gens / 10)))
    gen = 1
    while ev.used < ev.budget:
        gen += 1
        n_off = min(N, ev.budget - ev.used)
        parents = _mating_pool(algorithm, pop, F, rng)
        children = variation.make_offspring(parents, n_off, var_cfg, rng)
        F_children = ev.evaluate(children)

        pool = pop + children
        pool_F = np.vstack([F, F_children])
        # seeded shuffle fixes tie-break order inside the stable sorts
        perm = rng.permutation(len(pool))
        pool = [pool[i] for i in perm]
        pool_F = pool_F[perm]

        if algorithm == "nsga2":
            keep = nsga2_select(pool_F, min(N, len(pool)))
        elif algorithm == "nsga3":
            keep = nsga3_select(pool_F, min(N, len(pool)), dirs, rng)
        elif algorithm == "ibea":
            keep = ibea_select(pool_F, min(N, len(pool)))
        elif algorithm == "hype":
            keep = hype_select(pool_F, min(N, len(pool)), ref,
                               seed * 1_000_003 + gen)
        elif algorithm == "rvea":
            progress = min(1.0, gen / total_gens)
            keep, used = rvea_select(pool_F, dirs, pool_F.min(axis=0), progress)
            if gen % adapt_every == 0:
                span = pool_F.max(axis=0) - pool_F.min(axis=0)
                span = np.where(span > 1e-12, span, 1.0)
                dirs = base_dirs * span
                dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
                # RVEA*: regenerate vectors whose partitions stayed empty
                if not used.all():
                    fresh = rng.random((int((~used).sum()), problem.M))
                    fresh /= np.maximum(fresh.sum(axis=1, keepdims=True), 1e-12)
                    dirs[~used] = fresh
        else:  # pragma: no cover
            raise UnknownAlgorithm(algorithm)

        pop = [pool[i] for i in keep]
        F = pool_F[keep]
        _record_generation(record, gen, ev.used, F, ref, seed * 1_000_003 + gen)
    return pop, F


def _mating_pool(algorithm, pop, F, rng):
    if algorithm == "nsga2":
        fronts = fast_nondominated_sort(F)
        rank = np.empty(len(F), dtype=np.int64)
        for r, fr in enumerate(fronts):
            rank[fr] = r
        crowd = crowding_distance(F)
        keys = list(zip(rank.tolist(), (-crowd).tolist()))
        return [pop[_binary_tournament(keys, rng)] for _ in range(len(pop))]
    if algorithm == "ibea":
        fit = ibea_fitness(F)
        keys = (-fit).tolist()
        return [pop[_binary_tournament(keys, rng)] for _ in range(len(pop))]
    return list(pop)


def _moead_loop(problem, ev, pop, F, rng, var_cfg, record, ref, seed):
    N = len(pop)
    weights = directions_for(problem.M)
    assert len(weights) == N
    dist = np.linalg.norm(weights[:, None, :] - weights[None, :, :], axis=2)
    T = min(MOEAD_NEIGHBORS, N)
    neighbors = np.argsort(dist, axis=1, kind="stable")[:, :T]
    ideal = F.min(axis=0)
    gen = 1
    while ev.used < ev.budget:
        gen += 1
        n_off = min(N, ev.budget - ev.used)
        for i in range(n_off):
            if rng.random() < MOEAD_NEIGHBOR_PROB:
                pool_idx = neighbors[i]
            else:
                pool_idx = np.arange(N)
            a, b = rng.choice(pool_idx, size=2, replace=len(pool_idx) < 2)
            c1, _ = variation.sbx_pair(pop[a], pop[b], var_cfg, rng)
            child = variation.repair(variation.polynomial_mutation(c1, var_cfg, rng), rng)
            f_child = ev.evaluate([child])[0]
            ideal = np.minimum(ideal, f_child)
            replaced = 0
            for j in rng.permutation(pool_idx):
                if tchebycheff(f_child, weights[j], ideal) < tchebycheff(F[j], weights[j], ideal):
                    pop[j] = child
                    F[j] = f_child
                    replaced += 1
                    if replaced >= MOEAD_REPLACE_CAP:
                        break
        _record_generation(record, gen, ev.used, F, ref, seed * 1_000_003 + gen)
    return pop, F
