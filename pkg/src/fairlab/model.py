"""Weighted binary logistic regression with score output and threshold tuning.

Gradient descent with a backtracking line search on the mean weighted
negative log-likelihood plus an L2 penalty on the coefficients (intercept
unpenalized). Weighted statistics throughout, so duplicating an instance is
equivalent to doubling its weight.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .dataset import StructuredDataset
from .errors import (
    ArgumentError,
    DegenerateDataError,
    NumericalError,
    SchemaError,
)

__all__ = [
    "LogisticModel",
    "ScoredPredictions",
    "TrainConfig",
    "apply_threshold",
    "fit_logistic",
    "predict_scores",
    "tune_threshold",
]


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for fit_logistic; the digest identifies a fit exactly."""

    l2: float = 1e-4
    max_iter: int = 300
    tol: float = 1e-6
    learning_rate: float = 1.0
    standardize: bool = True
    seed: int | None = None

    def __post_init__(self):
        if self.l2 < 0:
            raise ArgumentError("l2 strength must be nonnegative")
        if self.max_iter < 0:
            raise ArgumentError("max_iter must be nonnegative")
        if self.tol <= 0:
            raise ArgumentError("tolerance must be positive")
        if self.learning_rate <= 0:
            raise ArgumentError("learning_rate must be positive")

    def digest(self) -> str:
        payload = json.dumps(
            {
                "l2": self.l2,
                "max_iter": self.max_iter,
                "tol": self.tol,
                "learning_rate": self.learning_rate,
                "standardize": self.standardize,
                "seed": self.seed,
            },
            sort_keys=True,
        )
        return hashlib.blake2b(payload.encode(), digest_size=8).hexdigest()


def _softplus(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass
class LogisticModel:
    """Fitted coefficients plus the standardization parameters used in training."""

    coef: np.ndarray
    intercept: float
    feature_names: tuple
    mean: np.ndarray | None = None
    scale: np.ndarray | None = None
    config_digest: str = ""
    n_iter: int = 0
    converged: bool = False

    def digest(self) -> str:
        h = hashlib.blake2b(digest_size=8)
        h.update(np.ascontiguousarray(self.coef).tobytes())
        h.update(np.float64(self.intercept).tobytes())
        h.update(repr(self.feature_names).encode())
        return h.hexdigest()

    def decision_values(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=float)
        if self.mean is not None:
            x = (x - self.mean) / self.scale
        return x @ self.coef + self.intercept

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "kind": "logistic",
            "coefficients": self.coef.tolist(),
            "intercept": float(self.intercept),
            "feature_names": list(self.feature_names),
            "standardization": (
                None
                if self.mean is None
                else {"mean": self.mean.tolist(), "scale": self.scale.tolist()}
            ),
            "config_digest": self.config_digest,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "LogisticModel":
        if raw.get("version") != 1 or raw.get("kind") != "logistic":
            raise ArgumentError("unsupported model document")
        std = raw.get("standardization")
        return cls(
            coef=np.asarray(raw["coefficients"], dtype=float),
            intercept=float(raw["intercept"]),
            feature_names=tuple(raw["feature_names"]),
            mean=None if std is None else np.asarray(std["mean"], dtype=float),
            scale=None if std is None else np.asarray(std["scale"], dtype=float),
            config_digest=raw.get("config_digest", ""),
        )


def loss_and_grad(
    x: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    coef: np.ndarray,
    intercept: float,
    l2: float,
) -> tuple[float, np.ndarray, float]:
    """Mean weighted NLL + (l2/2)||coef||^2 and its exact gradient."""
    total = float(w.sum())
    z = x @ coef + intercept
    loss = float((w * (_softplus(z) - y * z)).sum() / total) + 0.5 * l2 * float(
        coef @ coef
    )
    residual = w * (_sigmoid(z) - y)
    grad_coef = x.T @ residual / total + l2 * coef
    grad_intercept = float(residual.sum() / total)
    return loss, grad_coef, grad_intercept


def fit_logistic(ds: StructuredDataset, cfg: TrainConfig | None = None) -> LogisticModel:
    """Gradient descent with Armijo backtracking; deterministic for a fixed cfg."""
    cfg = cfg or TrainConfig()
    y = ds.binary_labels()
    w = ds.instance_weights
    if float(w[y == 1.0].sum()) == 0.0 or float(w[y == 0.0].sum()) == 0.0:
        raise DegenerateDataError("training data carries weight on only one class")

    x = np.asarray(ds.features, dtype=float)
    mean = scale = None
    if cfg.standardize:
        total = float(w.sum())
        mean = (w[:, None] * x).sum(axis=0) / total
        var = (w[:, None] * (x - mean) ** 2).sum(axis=0) / total
        scale = np.sqrt(var)
        scale[scale == 0.0] = 1.0
        x = (x - mean) / scale

    coef = np.zeros(x.shape[1])
    intercept = 0.0
    loss, g_coef, g_int = loss_and_grad(x, y, w, coef, intercept, cfg.l2)
    step = cfg.learning_rate
    n_iter = 0
    converged = False
    for i in range(cfg.max_iter):
        if not np.isfinite(loss):
            raise NumericalError(f"non-finite loss at iteration {i}")
        grad_sq = float(g_coef @ g_coef) + g_int**2
        if np.sqrt(grad_sq) <= cfg.tol:
            converged = True
            break
        accepted = False
        for _ in range(60):
            new_coef = coef - step * g_coef
            new_int = intercept - step * g_int
            new_loss, new_g_coef, new_g_int = loss_and_grad(
                x, y, w, new_coef, new_int, cfg.l2
            )
            if np.isfinite(new_loss) and new_loss <= loss - 1e-4 * step * grad_sq:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break  # step underflow: no further progress possible
        coef, intercept = new_coef, new_int
        loss, g_coef, g_int = new_loss, new_g_coef, new_g_int
        step = min(step * 2.0, 1e6)
        n_iter = i + 1
    else:
        converged = np.sqrt(float(g_coef @ g_coef) + g_int**2) <= cfg.tol

    return LogisticModel(
        coef=coef,
        intercept=float(intercept),
        feature_names=ds.feature_names,
        mean=mean,
        scale=scale,
        config_digest=cfg.digest(),
        n_iter=n_iter,
        converged=converged,
    )


@dataclass
class ScoredPredictions:
    """Probability scores for one dataset; hard labels are score > threshold."""

    dataset: StructuredDataset
    scores: np.ndarray
    threshold: float = 0.5
    model_digest: str = ""

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float).reshape(-1)
        if self.scores.shape[0] != self.dataset.n_instances:
            raise ArgumentError("score count does not match dataset rows")
        self.scores.setflags(write=False)

    def hard_labels(self, threshold: float | None = None) -> np.ndarray:
        t = self.threshold if threshold is None else threshold
        return np.where(
            self.scores > t, self.dataset.favorable_label, self.dataset.unfavorable_label
        )

    def replace_scores(self, scores: np.ndarray, note: str = "rescored") -> "ScoredPredictions":
        out = ScoredPredictions(
            dataset=self.dataset,
            scores=np.asarray(scores, dtype=float),
            threshold=self.threshold,
            model_digest=f"{self.model_digest}:{note}",
        )
        return out


def predict_scores(model: LogisticModel, ds: StructuredDataset) -> ScoredPredictions:
    if model.feature_names != ds.feature_names:
        raise SchemaError(
            "feature names do not match the fitted model; expected "
            f"{list(model.feature_names)[:5]}..."
        )
    scores = _sigmoid(model.decision_values(ds.features))
    return ScoredPredictions(dataset=ds, scores=scores, model_digest=model.digest())


def apply_threshold(sp: ScoredPredictions, threshold: float | None = None) -> StructuredDataset:
    """Predicted dataset: same rows, features, protection, weights; new labels."""
    t = sp.threshold if threshold is None else float(threshold)
    labels = sp.hard_labels(t)
    pred = sp.dataset.derive(
        "predict",
        {"model": sp.model_digest, "threshold": t},
        labels=labels,
        metadata={"scores": sp.scores},
    )
    return pred


def tune_threshold(
    sp: ScoredPredictions,
    true_ds: StructuredDataset | None = None,
    criterion: str = "balanced_accuracy",
    candidates: int = 100,
) -> float:
    """Best of `candidates` evenly spaced thresholds in (0,1); ties take the smallest."""
    if candidates < 1:
        raise ArgumentError("candidates must be >= 1")
    if criterion not in ("balanced_accuracy", "accuracy"):
        raise ArgumentError(f"unknown criterion {criterion!r}")
    truth = true_ds if true_ds is not None else sp.dataset
    y = truth.favorable_mask()
    w = truth.instance_weights
    w_pos = float(w[y].sum())
    w_neg = float(w[~y].sum())
    if w_pos == 0.0 or w_neg == 0.0:
        raise DegenerateDataError("validation data carries weight on only one class")

    best_t, best_v = None, -np.inf
    for j in range(1, candidates + 1):
        t = j / (candidates + 1)
        pred = sp.scores > t
        tp = float(w[y & pred].sum())
        tn = float(w[~y & ~pred].sum())
        if criterion == "balanced_accuracy":
            v = 0.5 * (tp / w_pos + tn / w_neg)
        else:
            v = (tp + tn) / (w_pos + w_neg)
        if v > best_v:
            best_t, best_v = t, v
    return best_t
