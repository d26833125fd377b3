"""Binary logistic regression, written out in full.

Training is deterministic full-batch gradient descent from zero
initialization with step halving on any loss increase, over standardized
features; the loss is L2-regularized cross-entropy with the bias left
unregularized. Everything is plain numpy so identical data and
configuration reproduce identical model bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .features import NUM_FEATURES, FeatureVector

_P_CLIP = 1e-15


@dataclass(frozen=True)
class RowProvenance:
    """Where a dataset row came from: base instance index, the fix
    percentage applied, and the base instance seed."""

    instance: int
    fix_percent: float
    seed: int


@dataclass
class Dataset:
    features: np.ndarray                 # (N, NUM_FEATURES) float64
    labels: np.ndarray                   # (N,) float64 in {0, 1}
    provenance: list[RowProvenance] = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.float64)
        if self.features.ndim != 2 or self.features.shape[1] != NUM_FEATURES:
            raise ValueError("features must be (N, %d)" % NUM_FEATURES)
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError("labels must align with features")
        if not np.all(np.isin(self.labels, (0.0, 1.0))):
            raise ValueError("labels must be binary")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features must be finite")

    def __len__(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray                    # population std; 1 for constant columns

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.scale


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 2000
    l2_lambda: float = 1e-4
    convergence_tol: float = 1e-7

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.l2_lambda < 0:
            raise ValueError("l2_lambda must be nonnegative")


@dataclass
class LogisticModel:
    weights: np.ndarray                  # (NUM_FEATURES,)
    bias: float
    standardizer: Standardizer
    metadata: dict[str, str] = field(default_factory=dict)


def fit_standardizer(d: Dataset) -> Standardizer:
    """Per-feature mean and population std over the dataset; constant
    features get scale 1 so standardization stays well defined."""
    if len(d) == 0:
        raise ValueError("cannot standardize an empty dataset")
    mean = d.features.mean(axis=0)
    std = d.features.std(axis=0)
    scale = np.where(std > 0.0, std, 1.0)
    return Standardizer(mean, scale)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    nonneg = z >= 0
    out[nonneg] = 1.0 / (1.0 + np.exp(-z[nonneg]))
    ez = np.exp(z[~nonneg])
    out[~nonneg] = ez / (1.0 + ez)
    return out


def loss_and_gradient(m: LogisticModel, d: Dataset,
                      l2_lambda: float = 0.0) -> tuple[float, np.ndarray]:
    """Regularized cross-entropy and its exact gradient.

    loss = mean(softplus(z) - y*z) + (l2/2)*||w||^2 with z over
    standardized features; the gradient stacks d/dw (10 entries) and d/db
    (last entry). The bias is not regularized.
    """
    if len(d) == 0:
        raise ValueError("empty dataset")
    x = m.standardizer.transform(d.features)
    z = x @ m.weights + m.bias
    y = d.labels
    n = len(d)
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    loss += 0.5 * l2_lambda * float(m.weights @ m.weights)
    resid = _sigmoid(z) - y
    grad = np.empty(NUM_FEATURES + 1)
    grad[:NUM_FEATURES] = x.T @ resid / n + l2_lambda * m.weights
    grad[NUM_FEATURES] = resid.mean()
    return loss, grad


def train(d: Dataset, cfg: TrainConfig | None = None,
          metadata: dict[str, str] | None = None,
          history: list[float] | None = None) -> LogisticModel:
    """Fit a model by deterministic full-batch gradient descent.

    Runs until the epoch budget is exhausted or the gradient norm drops
    below the convergence tolerance. A step that would increase the loss
    is retried with a halved learning rate (which stays halved), so the
    accepted-step loss sequence is non-increasing. ``history``, when
    given, collects the accepted-step losses.
    """
    cfg = cfg or TrainConfig()
    classes = np.unique(d.labels)
    if len(classes) < 2:
        raise ValueError("training requires both classes present")

    model = LogisticModel(np.zeros(NUM_FEATURES), 0.0, fit_standardizer(d),
                          dict(metadata or {}))
    lr = cfg.learning_rate
    loss, grad = loss_and_gradient(model, d, cfg.l2_lambda)
    epochs_run = 0
    for _ in range(cfg.epochs):
        if float(np.linalg.norm(grad)) < cfg.convergence_tol:
            break
        while True:
            w_new = model.weights - lr * grad[:NUM_FEATURES]
            b_new = model.bias - lr * grad[NUM_FEATURES]
            trial = LogisticModel(w_new, b_new, model.standardizer, model.metadata)
            new_loss, new_grad = loss_and_gradient(trial, d, cfg.l2_lambda)
            if new_loss <= loss or lr < 1e-18:
                break
            lr *= 0.5
        model, loss, grad = trial, new_loss, new_grad
        epochs_run += 1
        if history is not None:
            history.append(loss)
    model.metadata.setdefault("learning_rate", repr(cfg.learning_rate))
    model.metadata.setdefault("epochs", str(cfg.epochs))
    model.metadata.setdefault("epochs_run", str(epochs_run))
    model.metadata.setdefault("l2_lambda", repr(cfg.l2_lambda))
    model.metadata.setdefault("convergence_tol", repr(cfg.convergence_tol))
    model.metadata.setdefault("rows", str(len(d)))
    return model


def predict_proba(m: LogisticModel, x: FeatureVector | np.ndarray) -> float:
    """P(satisfiable) for one feature vector, strictly inside (0, 1)."""
    if isinstance(x, FeatureVector):
        x = np.array(x.as_tuple())
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (NUM_FEATURES,):
        raise ValueError("expected %d features" % NUM_FEATURES)
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    z = float(m.standardizer.transform(x) @ m.weights + m.bias)
    if z >= 0:
        p = 1.0 / (1.0 + math.exp(-min(z, 745.0)))
    else:
        ez = math.exp(max(z, -745.0))
        p = ez / (1.0 + ez)
    return min(max(p, _P_CLIP), 1.0 - _P_CLIP)


def accuracy(m: LogisticModel, d: Dataset, threshold: float = 0.5) -> float:
    """Fraction of rows classified correctly at the given threshold."""
    if len(d) == 0:
        raise ValueError("empty dataset")
    x = m.standardizer.transform(d.features)
    z = x @ m.weights + m.bias
    pred = (z >= math.log(threshold / (1.0 - threshold))) if threshold != 0.5 else (z >= 0.0)
    return float(np.mean(pred.astype(np.float64) == d.labels))


# ----------------------------------------------------------------------
# model file format: line-oriented text, stable across platforms

def model_to_text(m: LogisticModel) -> str:
    """Serialize a model; floats use repr so round-trips are exact."""
    lines = ["c satmc logistic model", "version 1"]
    for i in range(NUM_FEATURES):
        lines.append("weight %d %r" % (i + 1, float(m.weights[i])))
    lines.append("bias %r" % float(m.bias))
    for i in range(NUM_FEATURES):
        lines.append("mean %d %r" % (i + 1, float(m.standardizer.mean[i])))
    for i in range(NUM_FEATURES):
        lines.append("scale %d %r" % (i + 1, float(m.standardizer.scale[i])))
    for key in sorted(m.metadata):
        lines.append("c meta %s %s" % (key, m.metadata[key]))
    return "\n".join(lines) + "\n"


def model_from_text(text: str) -> LogisticModel:
    weights = np.full(NUM_FEATURES, np.nan)
    mean = np.full(NUM_FEATURES, np.nan)
    scale = np.full(NUM_FEATURES, np.nan)
    bias = None
    version = None
    metadata: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "c":
            if len(parts) >= 4 and parts[1] == "meta":
                metadata[parts[2]] = " ".join(parts[3:])
            continue
        if parts[0] == "version":
            version = parts[1]
        elif parts[0] in ("weight", "mean", "scale"):
            idx = int(parts[1]) - 1
            if not 0 <= idx < NUM_FEATURES:
                raise ValueError("bad feature index in model file: %s" % line)
            {"weight": weights, "mean": mean, "scale": scale}[parts[0]][idx] = float(parts[2])
        elif parts[0] == "bias":
            bias = float(parts[1])
        else:
            raise ValueError("unrecognized model line: %s" % line)
    if version != "1":
        raise ValueError("unsupported model file version %r" % version)
    if bias is None or np.any(np.isnan(weights)) or np.any(np.isnan(mean)) or np.any(np.isnan(scale)):
        raise ValueError("incomplete model file")
    return LogisticModel(weights, bias, Standardizer(mean, scale), metadata)


def save_model(m: LogisticModel, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(model_to_text(m))


def load_model(path: str) -> LogisticModel:
    with open(path) as fh:
        return model_from_text(fh.read())
