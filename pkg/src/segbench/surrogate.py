"""Prediction-error evaluator: mIoU utility, MLP surrogate, training loop.

The error objective is 1 - mIoU. Since training real segmentation networks
is out of reach here, a deterministic synthetic oracle defines the ground
truth error, and a small feed-forward regressor is fitted to it with the
combined ranking + MSE loss.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import encoding, lut
from .errors import InsufficientData, ShapeError, UndefinedClassIoU


def miou(tp, fp, fn) -> float:
    """Mean intersection-over-union over classes.

    tp/fp/fn are per-class pixel counts of equal length N. Raises
    UndefinedClassIoU for a class with no pixels at all.
    """
    tp = np.asarray(tp, dtype=np.float64)
    fp = np.asarray(fp, dtype=np.float64)
    fn = np.asarray(fn, dtype=np.float64)
    if not (tp.shape == fp.shape == fn.shape) or tp.ndim != 1 or tp.size < 1:
        raise ShapeError("tp/fp/fn must be equal-length 1-D arrays")
    denom = tp + fp + fn
    zero = np.nonzero(denom == 0)[0]
    if zero.size:
        raise UndefinedClassIoU(int(zero[0]))
    return float(np.mean(tp / denom))


def loss(predictions, truths, gamma: float = 0.05):
    """Combined loss: (total, mse, rank).

    mse  = (1/N) sum_i (yhat_i - y_i)^2
    rank = (1/2N) sum over ordered pairs i != j of
           max(0, gamma - delta(yhat_i, yhat_j) * (y_i - y_j)),
    delta = +1 if yhat_i > yhat_j else -1.
    """
    yhat = np.asarray(predictions, dtype=np.float64)
    y = np.asarray(truths, dtype=np.float64)
    if yhat.shape != y.shape or yhat.ndim != 1 or yhat.size < 1:
        raise ShapeError(f"prediction/truth shape mismatch: {yhat.shape} vs {y.shape}")
    n = yhat.size
    mse = float(np.mean((yhat - y) ** 2))
    delta = np.where(yhat[:, None] > yhat[None, :], 1.0, -1.0)
    hinge = np.maximum(0.0, gamma - delta * (y[:, None] - y[None, :]))
    np.fill_diagonal(hinge, 0.0)
    rank = float(np.sum(hinge) / (2 * n))
    return mse + rank, mse, rank


@dataclass
class TrainingConfig:
    gamma: float = 0.05
    batch_size: int = 64
    epochs: int = 300
    learning_rate: float = 1e-3

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


@dataclass
class SurrogateModel:
    """Feed-forward regressor: rectifier hidden layers, logistic output."""

    layer_dims: list
    weights: list = field(repr=False)
    biases: list = field(repr=False)

    def __post_init__(self):
        if len(self.weights) != len(self.layer_dims) - 1:
            raise ShapeError("weights do not match layer_dims")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            want = (self.layer_dims[i], self.layer_dims[i + 1])
            if w.shape != want or b.shape != (self.layer_dims[i + 1],):
                raise ShapeError(f"layer {i} shapes {w.shape}/{b.shape} != {want}")

    @classmethod
    def initialize(cls, seed: int, layer_dims=(32, 128, 128, 1)) -> "SurrogateModel":
        rng = np.random.default_rng(np.random.SeedSequence([0x514, seed]))
        dims = list(layer_dims)
        weights, biases = [], []
        for i in range(len(dims) - 1):
            scale = math.sqrt(2.0 / dims[i])
            weights.append(rng.normal(0.0, scale, size=(dims[i], dims[i + 1])))
            biases.append(np.zeros(dims[i + 1]))
        return cls(dims, weights, biases)

    def forward(self, X: np.ndarray) -> np.ndarray:
        """Batch forward pass; returns predictions in (0, 1)."""
        a = X
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            a = np.maximum(0.0, a @ w + b)
        z = a @ self.weights[-1] + self.biases[-1]
        return 1.0 / (1.0 + np.exp(-z[:, 0]))

    # -- serialization ----------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "layer_dims": list(self.layer_dims),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "SurrogateModel":
        return cls(list(obj["layer_dims"]),
                   [np.asarray(w, dtype=np.float64) for w in obj["weights"]],
                   [np.asarray(b, dtype=np.float64) for b in obj["biases"]])

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_obj(), fh)

    @classmethod
    def load(cls, path) -> "SurrogateModel":
        with open(path) as fh:
            return cls.from_json_obj(json.load(fh))


def featurize(genotypes) -> np.ndarray:
    """Per-gene min-max normalization of the canonical genotype."""
    _, upper = encoding.bounds()
    G = np.asarray([encoding.canonicalize(g) for g in genotypes], dtype=np.float64)
    return G / upper


def predict(model: SurrogateModel, g) -> float:
    """Predicted error for one genotype; strictly inside (0, 1)."""
    return float(model.forward(featurize([g]))[0])


def predict_batch(model: SurrogateModel, genotypes) -> np.ndarray:
    return model.forward(featurize(genotypes))


def _mse_gradients(model: SurrogateModel, X: np.ndarray, y: np.ndarray):
    """Backprop of the MSE term. The rank term is piecewise constant in the
    predictions (delta is a step function of yhat), so its subgradient
    contributes nothing almost everywhere."""
    acts = [X]
    a = X
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        a = np.maximum(0.0, a @ w + b)
        acts.append(a)
    z = a @ model.weights[-1] + model.biases[-1]
    out = 1.0 / (1.0 + np.exp(-z[:, 0]))

    n = X.shape[0]
    dout = 2.0 * (out - y) / n
    dz = (dout * out * (1.0 - out))[:, None]
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.biases)
    for i in range(len(model.weights) - 1, -1, -1):
        grads_w[i] = acts[i].T @ dz
        grads_b[i] = dz.sum(axis=0)
        if i > 0:
            dz = (dz @ model.weights[i].T) * (acts[i] > 0)
    return grads_w, grads_b, out


def loss_gradients(model: SurrogateModel, X: np.ndarray, y: np.ndarray, gamma: float):
    """Analytic gradient of the total (mse + rank) loss wrt all parameters."""
    gw, gb, _ = _mse_gradients(model, X, y)
    return gw, gb


def train(pairs, cfg: TrainingConfig = None, seed: int = 0):
    """Fit the surrogate on (genotype, error) pairs.

    A 20% held-out split (fixed by seed) yields the accuracy report:
    MAE, Pearson rho, Spearman rho. Returns (model, report dict).
    """
    from scipy import stats

    cfg = cfg or TrainingConfig()
    if len(pairs) < 100:
        raise InsufficientData(f"need >= 100 training pairs, got {len(pairs)}")
    errors = np.asarray([float(e) for _, e in pairs])
    if np.any(errors < 0) or np.any(errors > 1):
        raise ValueError("target errors must lie in [0, 1]")
    X = featurize([g for g, _ in pairs])

    rng = np.random.default_rng(np.random.SeedSequence([0x7124, seed]))
    perm = rng.permutation(len(pairs))
    n_hold = max(1, len(pairs) // 5)
    hold, tr = perm[:n_hold], perm[n_hold:]
    Xtr, ytr = X[tr], errors[tr]
    Xh, yh = X[hold], errors[hold]

    model = SurrogateModel.initialize(seed)
    # Adam state
    mw = [np.zeros_like(w) for w in model.weights]
    vw = [np.zeros_like(w) for w in model.weights]
    mb = [np.zeros_like(b) for b in model.biases]
    vb = [np.zeros_like(b) for b in model.biases]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0
    epoch_losses = []
    for _ in range(cfg.epochs):
        order = rng.permutation(len(tr))
        for start in range(0, len(tr), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            gw, gb = loss_gradients(model, Xtr[idx], ytr[idx], cfg.gamma)
            step += 1
            corr1 = 1 - beta1 ** step
            corr2 = 1 - beta2 ** step
            for i in range(len(model.weights)):
                mw[i] = beta1 * mw[i] + (1 - beta1) * gw[i]
                vw[i] = beta2 * vw[i] + (1 - beta2) * gw[i] ** 2
                mb[i] = beta1 * mb[i] + (1 - beta1) * gb[i]
                vb[i] = beta2 * vb[i] + (1 - beta2) * gb[i] ** 2
                model.weights[i] -= cfg.learning_rate * (mw[i] / corr1) / (np.sqrt(vw[i] / corr2) + eps)
                model.biases[i] -= cfg.learning_rate * (mb[i] / corr1) / (np.sqrt(vb[i] / corr2) + eps)
        total, _, _ = loss(model.forward(Xtr), ytr, cfg.gamma)
        epoch_losses.append(total)

    pred = model.forward(Xh)
    report = {
        "mae": float(np.mean(np.abs(pred - yh))),
        "pearson": float(stats.pearsonr(pred, yh)[0]),
        "spearman": float(stats.spearmanr(pred, yh)[0]),
        "holdout_size": int(n_hold),
        "train_size": int(len(tr)),
        "epoch_losses": epoch_losses,
    }
    return model, report


# -- synthetic ground truth -----------------------------------------------

_ORACLE_TABLE_CACHE = {}


def _oracle_table(seed: int = 0) -> lut.CostTable:
    if seed not in _ORACLE_TABLE_CACHE:
        _ORACLE_TABLE_CACHE[seed] = lut.generate_synthetic_table(seed)
    return _ORACLE_TABLE_CACHE[seed]


def synthetic_error_oracle(g, seed: int = 0, table: lut.CostTable = None) -> float:
    """Deterministic ground-truth error standing in for trained networks.

    Smooth logistic decay in log-FLOPs (bigger models err less, with
    diminishing returns) plus a small seeded per-stage interaction term.
    Output stays strictly inside (0, 1).
    """
    return float(synthetic_error_batch([g], seed=seed, table=table)[0])


def synthetic_error_batch(genotypes, seed: int = 0, table: lut.CostTable = None) -> np.ndarray:
    table = table or _oracle_table(0)
    genes = [encoding.validate(g) for g in genotypes]
    flops = lut.compose_batch(genes, lut.FLOPS, table)
    fmin = lut.compose_cost(lut.min_genotype(), lut.FLOPS, table)
    fmax = lut.compose_cost(lut.max_genotype(), lut.FLOPS, table)
    f0 = math.sqrt(fmin * fmax)
    z = np.log(flops / f0)
    base = 0.08 + 0.9 / (1.0 + np.exp(z))

    rng = np.random.default_rng(np.random.SeedSequence([0x0E44, seed]))
    G = np.asarray(genes, dtype=np.float64)
    interaction = np.zeros(len(genes))
    for s in range(encoding.NUM_STAGES):
        cols = [s] + list(range(4 + 6 * s, 10 + 6 * s)) + [28 + s]
        w = rng.normal(0.0, 0.5, size=len(cols))
        phase = rng.uniform(0, 2 * math.pi)
        interaction += 0.01 * np.sin(G[:, cols] @ w + phase)
    return np.clip(base + interaction, 1e-4, 1.0 - 1e-4)
