"""Feedforward surrogate for core energy/area prediction, plus analysis.

A two-hidden-layer fully connected net (41 -> 40 -> 20 -> 1) with Softplus
activations, trained with full-batch Adam on mean squared error and L2
weight decay. Inputs are affinely rescaled to [-1, 1] per feature over the
training set and labels to [0, 1]; weights start from uniform Xavier
fan-in/fan-out initialization with zero biases. Everything is seeded and
single-threaded, so retraining reproduces byte-identical weights.

Analysis utilities inspect first-hidden-layer feature weights, trace
second-hidden-layer activations along the frequency axis to find neurons
that switch on (the knee of the energy-frequency curve), and compare the
smoothness of Softplus vs rectifier variants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import F_ACH_INDEX, FEATURE_COLUMNS, N_FEATURES
from .errors import ConfigError, NumericError, ParameterError, SchemaError

DEFAULT_SIZES = (N_FEATURES, 40, 20, 1)


def softplus(x):
    """ln(1 + e^x), evaluated as max(x,0) + ln(1 + e^-|x|) to avoid overflow."""
    x = np.asarray(x, dtype=float)
    out = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    return out if out.ndim else float(out)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


@dataclass
class MLP:
    sizes: tuple
    activation: str               # softplus | relu
    weights: list                 # per layer, shape (n_out, n_in)
    biases: list                  # per layer, shape (n_out,)
    x_lo: np.ndarray | None = None
    x_hi: np.ndarray | None = None
    y_lo: float = 0.0
    y_hi: float = 1.0
    seed: int = 0

    def rescale(self, x):
        if self.x_lo is None:
            return np.asarray(x, dtype=float)
        span = np.where(self.x_hi > self.x_lo, self.x_hi - self.x_lo, 1.0)
        return 2.0 * (np.asarray(x, dtype=float) - self.x_lo) / span - 1.0

    def _act(self, z):
        if self.activation == "softplus":
            return softplus(z)
        return np.maximum(z, 0.0)

    def forward(self, x, keep_hidden: bool = False):
        """x: (n_features,) or (n, n_features) already rescaled."""
        h = np.atleast_2d(np.asarray(x, dtype=float))
        hidden = []
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w.T + b
            if k < len(self.weights) - 1:
                h = self._act(z)
                hidden.append(h)
            else:
                h = z
        return (h[:, 0], hidden) if keep_hidden else h[:, 0]


def build_mlp(sizes=DEFAULT_SIZES, activation: str = "softplus", seed: int = 0) -> MLP:
    """Xavier-uniform weights (+-sqrt(6/(n_in+n_out))), zero biases, seeded."""
    if not sizes or len(sizes) < 2:
        raise ParameterError("sizes must list at least input and output widths")
    if activation not in ("softplus", "relu"):
        raise ParameterError(f"unknown activation {activation!r}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        bound = math.sqrt(6.0 / (n_in + n_out))
        weights.append(rng.uniform(-bound, bound, size=(n_out, n_in)))
        biases.append(np.zeros(n_out))
    return MLP(sizes=tuple(sizes), activation=activation, weights=weights,
               biases=biases, seed=seed)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    l2: float = 1e-4
    epochs: int = 50000
    val_fraction: float = 0.2  # of the provided data, split 80/20
    seed: int = 0
    record_every: int = 1


@dataclass
class TrainResult:
    model: MLP
    train_loss: list
    val_loss: list
    best_epoch: int
    best_val_mse: float
    best_val_rmse: float
    best_val_rel_rmse: float  # RMSE over the normalized [0,1] label range


def _forward_cache(model: MLP, x):
    acts = [x]
    zs = []
    h = x
    for k, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w.T + b
        zs.append(z)
        if k < len(model.weights) - 1:
            h = model._act(z)
        else:
            h = z
        acts.append(h)
    return acts, zs


def _backward(model: MLP, acts, zs, dloss_dout):
    """Gradients of the scalar loss w.r.t. every weight and bias."""
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.biases)
    delta = dloss_dout  # (n, n_out_last)
    for k in range(len(model.weights) - 1, -1, -1):
        grads_w[k] = delta.T @ acts[k]
        grads_b[k] = delta.sum(axis=0)
        if k > 0:
            if model.activation == "softplus":
                dact = _sigmoid(zs[k - 1])
            else:
                dact = (zs[k - 1] > 0).astype(float)
            delta = (delta @ model.weights[k]) * dact
    return grads_w, grads_b


def train(model: MLP, features, labels, cfg: TrainConfig | None = None) -> TrainResult:
    """Full-batch Adam on MSE + L2; returns the best-validation weights."""
    cfg = cfg or TrainConfig()
    x_raw = np.asarray(features, dtype=float)
    y_raw = np.asarray(labels, dtype=float)
    if x_raw.ndim != 2 or x_raw.shape[1] != model.sizes[0]:
        raise ParameterError(f"features must be (n, {model.sizes[0]})")
    if len(y_raw) != len(x_raw):
        raise ParameterError("labels and features disagree in length")
    if len(x_raw) < 10:
        raise ParameterError("need at least 10 rows to train")

    model.x_lo = x_raw.min(axis=0)
    model.x_hi = x_raw.max(axis=0)
    y_lo, y_hi = float(y_raw.min()), float(y_raw.max())
    model.y_lo, model.y_hi = y_lo, y_hi
    y_span = (y_hi - y_lo) or 1.0
    x = model.rescale(x_raw)
    y = (y_raw - y_lo) / y_span

    rng = np.random.default_rng(cfg.seed)
    perm = rng.permutation(len(x))
    n_val = max(1, int(round(cfg.val_fraction * len(x))))
    val_idx, tr_idx = perm[:n_val], perm[n_val:]
    xt, yt = x[tr_idx], y[tr_idx]
    xv, yv = x[val_idx], y[val_idx]
    n = len(xt)

    m_w = [np.zeros_like(w) for w in model.weights]
    v_w = [np.zeros_like(w) for w in model.weights]
    m_b = [np.zeros_like(b) for b in model.biases]
    v_b = [np.zeros_like(b) for b in model.biases]
    train_hist, val_hist = [], []
    best = None
    for epoch in range(1, cfg.epochs + 1):
        acts, zs = _forward_cache(model, xt)
        resid = acts[-1][:, 0] - yt
        loss = float(np.mean(resid**2))
        if not np.isfinite(loss):
            raise NumericError(f"training diverged (NaN/inf loss) at epoch {epoch}")
        dloss = (2.0 / n) * resid[:, None]
        grads_w, grads_b = _backward(model, acts, zs, dloss)
        t = epoch
        for k in range(len(model.weights)):
            gw = grads_w[k] + cfg.l2 * model.weights[k]
            m_w[k] = cfg.beta1 * m_w[k] + (1 - cfg.beta1) * gw
            v_w[k] = cfg.beta2 * v_w[k] + (1 - cfg.beta2) * gw**2
            mb_hat = m_w[k] / (1 - cfg.beta1**t)
            vb_hat = v_w[k] / (1 - cfg.beta2**t)
            model.weights[k] -= cfg.learning_rate * mb_hat / (np.sqrt(vb_hat) + cfg.eps)
            gb = grads_b[k]
            m_b[k] = cfg.beta1 * m_b[k] + (1 - cfg.beta1) * gb
            v_b[k] = cfg.beta2 * v_b[k] + (1 - cfg.beta2) * gb**2
            mbb = m_b[k] / (1 - cfg.beta1**t)
            vbb = v_b[k] / (1 - cfg.beta2**t)
            model.biases[k] -= cfg.learning_rate * mbb / (np.sqrt(vbb) + cfg.eps)
        if epoch % cfg.record_every == 0 or epoch == cfg.epochs:
            val_pred = model.forward(xv)
            val_mse = float(np.mean((val_pred - yv) ** 2))
            train_hist.append(loss)
            val_hist.append(val_mse)
            if best is None or val_mse < best[1]:
                best = (epoch, val_mse,
                        [w.copy() for w in model.weights],
                        [b.copy() for b in model.biases])
    model.weights = best[2]
    model.biases = best[3]
    rmse = math.sqrt(best[1])
    return TrainResult(model=model, train_loss=train_hist, val_loss=val_hist,
                       best_epoch=best[0], best_val_mse=best[1],
                       best_val_rmse=rmse, best_val_rel_rmse=rmse)


def predict(model: MLP, features) -> float:
    """Forward pass on one raw 41-feature vector; returns label units."""
    x = np.asarray(features, dtype=float)
    if x.shape != (model.sizes[0],):
        raise ParameterError(f"expected {model.sizes[0]} features, got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ParameterError("features must be finite")
    out = model.forward(model.rescale(x))[0]
    return float(out * (model.y_hi - model.y_lo) + model.y_lo)


def predict_batch(model: MLP, features) -> np.ndarray:
    x = model.rescale(np.asarray(features, dtype=float))
    return model.forward(x) * (model.y_hi - model.y_lo) + model.y_lo


def grad_check(model: MLP, sample, label: float = 0.0, h: float = 1e-5) -> float:
    """Max relative error between backprop and central differences."""
    x = np.atleast_2d(np.asarray(sample, dtype=float))
    y = np.array([label], dtype=float)

    def loss_fn():
        return float(np.mean((model.forward(x) - y) ** 2))

    acts, zs = _forward_cache(model, x)
    resid = acts[-1][:, 0] - y
    dloss = (2.0 / len(x)) * resid[:, None]
    grads_w, grads_b = _backward(model, acts, zs, dloss)
    worst = 0.0
    for k in range(len(model.weights)):
        for arr, grad in ((model.weights[k], grads_w[k]), (model.biases[k], grads_b[k])):
            flat = arr.ravel()
            gflat = grad.ravel()
            for i in range(flat.size):
                keep = flat[i]
                flat[i] = keep + h
                up = loss_fn()
                flat[i] = keep - h
                dn = loss_fn()
                flat[i] = keep
                num = (up - dn) / (2.0 * h)
                denom = max(abs(num), abs(gflat[i]), 1e-8)
                worst = max(worst, abs(num - gflat[i]) / denom)
    return worst


# --- analysis ----------------------------------------------------------------

@dataclass
class NeuronWeightReport:
    neuron: int
    ranked: list          # [(feature name, weight)] by |weight| descending
    dominant_group: str   # "interconnect" | "logic"


def analyze_weights(model: MLP):
    """Per first-hidden-layer neuron: features ranked by |weight|."""
    w1 = model.weights[0]
    reports = []
    n_logic = 30
    for j in range(w1.shape[0]):
        pairs = sorted(zip(FEATURE_COLUMNS, w1[j]), key=lambda kv: -abs(kv[1]))
        logic_mean = float(np.mean(np.abs(w1[j, :n_logic])))
        itc_mean = float(np.mean(np.abs(w1[j, n_logic:n_logic + 9])))
        reports.append(NeuronWeightReport(
            neuron=j, ranked=[(k, float(v)) for k, v in pairs],
            dominant_group="interconnect" if itc_mean > logic_mean else "logic"))
    return reports


def ion_delay_sign_agreement(model: MLP) -> float:
    """Fraction of HL1 neurons whose mean I_ON weight opposes the mean delay
    weight (reported, not asserted)."""
    w1 = model.weights[0]
    ion_idx = [i for i, c in enumerate(FEATURE_COLUMNS) if "_ion_" in c]
    dly_idx = [i for i, c in enumerate(FEATURE_COLUMNS) if "_delay_" in c]
    opposite = sum(1 for j in range(w1.shape[0])
                   if w1[j, ion_idx].mean() * w1[j, dly_idx].mean() < 0)
    return opposite / w1.shape[0]


@dataclass
class PivotReport:
    f_grid: list
    traces: np.ndarray          # (n_hl2, n_grid) activations
    always_inactive: list
    always_active: list
    transitioning: list
    strict_pivots: list         # subset: truly swings from below lo to above hi


def find_pivot(model: MLP, base_features, f_grid, theta_lo: float = 0.05,
               theta_hi: float = 0.5) -> PivotReport:
    """Classify second-hidden-layer neurons along the frequency axis.

    Thresholds are relative to the largest activation seen in any trace.
    Partition: always-inactive (max < lo), always-active (min > hi),
    transitioning (the rest).
    """
    base = np.asarray(base_features, dtype=float)
    rows = np.tile(base, (len(f_grid), 1))
    rows[:, F_ACH_INDEX] = f_grid
    x = model.rescale(rows)
    _, hidden = model.forward(x, keep_hidden=True)
    traces = hidden[-1].T  # (n_hl2, n_grid)
    peak = float(traces.max()) or 1.0
    lo = theta_lo * peak
    hi = theta_hi * peak
    inactive, active, transitioning, strict = [], [], [], []
    for j in range(traces.shape[0]):
        t_max, t_min = float(traces[j].max()), float(traces[j].min())
        if t_max < lo:
            inactive.append(j)
        elif t_min > hi:
            active.append(j)
        else:
            transitioning.append(j)
            if t_min < lo and t_max > hi:
                strict.append(j)
    return PivotReport(f_grid=list(f_grid), traces=traces,
                       always_inactive=inactive, always_active=active,
                       transitioning=transitioning, strict_pivots=strict)


@dataclass
class ReluCompareReport:
    f_grid: list
    softplus_curve: np.ndarray
    relu_curve: np.ndarray
    softplus_smoothness: float
    relu_smoothness: float
    ratio: float  # relu / softplus


def _smoothness(curve) -> float:
    d2 = np.diff(curve, 2)
    return float(np.mean(np.abs(d2)))


def relu_compare(features, labels, base_features, f_grid,
                 cfg: TrainConfig | None = None, sizes=DEFAULT_SIZES) -> ReluCompareReport:
    """Train Softplus and ReLU twins and compare E-f curve smoothness."""
    cfg = cfg or TrainConfig()
    curves = {}
    for act in ("softplus", "relu"):
        model = build_mlp(sizes, act, seed=cfg.seed)
        train(model, features, labels, cfg)
        rows = np.tile(np.asarray(base_features, dtype=float), (len(f_grid), 1))
        rows[:, F_ACH_INDEX] = f_grid
        curves[act] = predict_batch(model, rows)
    s_soft = _smoothness(curves["softplus"])
    s_relu = _smoothness(curves["relu"])
    return ReluCompareReport(f_grid=list(f_grid),
                             softplus_curve=curves["softplus"],
                             relu_curve=curves["relu"],
                             softplus_smoothness=s_soft, relu_smoothness=s_relu,
                             ratio=s_relu / s_soft if s_soft > 0 else float("inf"))


# --- model file --------------------------------------------------------------

MODEL_FORMAT_VERSION = 1


def save_model(model: MLP, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"dispel-mlp v{MODEL_FORMAT_VERSION}\n")
        fh.write(f"sizes {' '.join(str(s) for s in model.sizes)}\n")
        fh.write(f"activation {model.activation}\n")
        fh.write(f"seed {model.seed}\n")
        fh.write(f"y_range {float(model.y_lo)!r} {float(model.y_hi)!r}\n")
        if model.x_lo is None:
            fh.write("x_range none\n")
        else:
            fh.write("x_range " + " ".join(repr(float(v)) for v in model.x_lo) + "\n")
            fh.write("x_range_hi " + " ".join(repr(float(v)) for v in model.x_hi) + "\n")
        for k, (w, b) in enumerate(zip(model.weights, model.biases)):
            fh.write(f"layer {k}\n")
            for row in w:
                fh.write(" ".join(repr(float(v)) for v in row) + "\n")
            fh.write(" ".join(repr(float(v)) for v in b) + "\n")


def load_model(path) -> MLP:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("dispel-mlp v"):
        raise SchemaError(f"{path}: not a model file")
    if lines[0] != f"dispel-mlp v{MODEL_FORMAT_VERSION}":
        raise SchemaError(f"{path}: unsupported version {lines[0]!r}")
    it = iter(lines[1:])
    sizes = tuple(int(t) for t in next(it).split()[1:])
    activation = next(it).split()[1]
    seed = int(next(it).split()[1])
    y_lo, y_hi = (float(t) for t in next(it).split()[1:])
    line = next(it)
    x_lo = x_hi = None
    if line != "x_range none":
        x_lo = np.array([float(t) for t in line.split()[1:]])
        x_hi = np.array([float(t) for t in next(it).split()[1:]])
    weights, biases = [], []
    for k, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        tag = next(it)
        if tag != f"layer {k}":
            raise SchemaError(f"{path}: expected 'layer {k}', got {tag!r}")
        w = np.array([[float(t) for t in next(it).split()] for _ in range(n_out)])
        b = np.array([float(t) for t in next(it).split()])
        if w.shape != (n_out, n_in) or b.shape != (n_out,):
            raise SchemaError(f"{path}: layer {k} has wrong shape")
        weights.append(w)
        biases.append(b)
    return MLP(sizes=sizes, activation=activation, weights=weights, biases=biases,
               x_lo=x_lo, x_hi=x_hi, y_lo=y_lo, y_hi=y_hi, seed=seed)
