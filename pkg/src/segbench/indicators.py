"""Pareto dominance utilities, hypervolume, and rank-sum statistics."""
from __future__ import annotations

import numpy as np
from scipy import stats

from .errors import ShapeError

BEST = "+"
WORST = "-"
TIE = "≈"  # the approx sign used for statistically tied results


def dominates(a, b) -> bool:
    """True iff a <= b componentwise with strict improvement somewhere."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"arity mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def domination_matrix(F: np.ndarray) -> np.ndarray:
    """D[i, j] == True iff point i dominates point j."""
    F = np.asarray(F, dtype=np.float64)
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    return le & lt


def nondominated_mask(F: np.ndarray) -> np.ndarray:
    F = np.asarray(F, dtype=np.float64)
    if F.size == 0:
        return np.zeros(0, dtype=bool)
    return ~domination_matrix(F).any(axis=0)


def fast_nondominated_sort(F: np.ndarray):
    """Partition points into fronts; returns a list of index arrays."""
    n = len(F)
    if n == 0:
        return []
    D = domination_matrix(F)
    dominated_count = D.sum(axis=0).astype(np.int64)
    fronts = []
    remaining = dominated_count.copy()
    assigned = np.zeros(n, dtype=bool)
    while not assigned.all():
        current = np.nonzero((remaining == 0) & ~assigned)[0]
        fronts.append(current)
        assigned[current] = True
        remaining -= D[current].sum(axis=0)
        remaining[assigned] = 1  # keep already-assigned points out
    return fronts


# -- hypervolume ------------------------------------------------------------

MC_CUTOFF_M = 5
MC_SAMPLES = 100_000


def _clip_front(front, ref):
    F = np.asarray(front, dtype=np.float64)
    if F.size == 0:
        return F.reshape(0, len(ref))
    if F.ndim != 2 or F.shape[1] != len(ref):
        raise ShapeError(f"front shape {F.shape} incompatible with ref of length {len(ref)}")
    if not np.all(np.isfinite(F)):
        raise ShapeError("front contains non-finite values")
    return np.minimum(F, np.asarray(ref, dtype=np.float64))


def _hv2d(F: np.ndarray, ref: np.ndarray) -> float:
    # sweep over the first objective; F already clipped and non-empty
    order = np.lexsort((F[:, 1], F[:, 0]))
    F = F[order]
    hv = 0.0
    best_y = ref[1]
    for x, y in F:
        if y < best_y:
            hv += (ref[0] - x) * (best_y - y)
            best_y = y
    return hv


def _wfg_hv(F: np.ndarray, ref: np.ndarray) -> float:
    if len(F) == 0:
        return 0.0
    if F.shape[1] == 2:
        return _hv2d(F, ref)
    keep = nondominated_mask(F)
    F = np.unique(F[keep], axis=0)
    # descending volume heuristic tightens the recursion
    vol = np.prod(ref - F, axis=1)
    F = F[np.argsort(-vol, kind="stable")]
    total = 0.0
    for i in range(len(F)):
        incl = float(np.prod(ref - F[i]))
        if i + 1 < len(F):
            limited = np.maximum(F[i + 1:], F[i])
            total += incl - _wfg_hv(limited, ref)
        else:
            total += incl
    return total


def hypervolume_exact(front, ref) -> float:
    """Exact hypervolume by recursive slicing (2-D sweep at the base)."""
    ref = np.asarray(ref, dtype=np.float64)
    F = _clip_front(front, ref)
    if len(F) == 0:
        return 0.0
    keep = nondominated_mask(F)
    F = np.unique(F[keep], axis=0)
    if ref.shape[0] == 1:
        return float(ref[0] - F[:, 0].min())
    return float(_wfg_hv(F, ref))


def hypervolume_mc(front, ref, n_samples: int = MC_SAMPLES, seed: int = 0):
    """Monte Carlo hypervolume in the [0, ref] box: (estimate, std error)."""
    ref = np.asarray(ref, dtype=np.float64)
    F = _clip_front(front, ref)
    if len(F) == 0:
        return 0.0, 0.0
    F = F[nondominated_mask(F)]
    rng = np.random.default_rng(np.random.SeedSequence([0x4777, seed]))
    box = float(np.prod(ref))
    hits = 0
    chunk = 20_000
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        samples = rng.random((m, len(ref))) * ref
        dominated = np.zeros(m, dtype=bool)
        for p in F:
            dominated |= np.all(samples >= p, axis=1)
            # cheap early exit once everything is covered
            if dominated.all():
                break
        hits += int(dominated.sum())
        done += m
    frac = hits / n_samples
    est = box * frac
    se = box * np.sqrt(max(frac * (1 - frac), 0.0) / n_samples)
    return float(est), float(se)


def hypervolume(front, ref, seed: int = 0) -> float:
    """Exact slicing for up to four objectives, Monte Carlo beyond."""
    ref = np.asarray(ref, dtype=np.float64)
    if len(ref) < MC_CUTOFF_M:
        return hypervolume_exact(front, ref)
    return hypervolume_mc(front, ref, seed=seed)[0]


# -- rank-sum statistics ----------------------------------------------------

def rank_sum_test(x, y, alpha: float = 0.05):
    """Two-sided Mann-Whitney rank-sum test: (p_value, same_distribution).

    Small tie-free samples use the exact U distribution; larger ones the
    normal approximation with tie and continuity corrections (scipy).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2 or y.size < 2:
        raise ShapeError("both samples need at least 2 values")
    n1, n2 = x.size, y.size
    u1 = stats.mannwhitneyu(x, y, alternative="two-sided").statistic
    if u1 == n1 * n2 / 2.0:
        # zero rank separation; the continuity correction would otherwise
        # push the p-value just below 1
        return 1.0, True
    res = stats.mannwhitneyu(x, y, alternative="two-sided", method="auto",
                             use_continuity=True)
    p = float(res.pvalue)
    return p, p >= alpha


def label_table(hv_samples: dict, alpha: float = 0.05) -> dict:
    """Per-algorithm (mean, std, label): one BEST, others TIE or WORST.

    BEST goes to the highest-mean algorithm (name order breaks exact
    mean ties, which keeps the labels invariant under input ordering);
    every other algorithm is TIE when the rank-sum test accepts sameness
    against the best sample, WORST otherwise.
    """
    if not hv_samples:
        return {}
    sizes = {len(v) for v in hv_samples.values()}
    if len(sizes) != 1:
        raise ShapeError(f"unequal sample counts: {sizes}")
    means = {a: float(np.mean(v)) for a, v in hv_samples.items()}
    best_algo = min(means, key=lambda a: (-means[a], a))
    out = {}
    for algo, values in hv_samples.items():
        mean = means[algo]
        std = float(np.std(values, ddof=0))
        if algo == best_algo:
            label = BEST
        else:
            _, same = rank_sum_test(values, hv_samples[best_algo], alpha)
            label = TIE if same else WORST
        out[algo] = (mean, std, label)
    return out
