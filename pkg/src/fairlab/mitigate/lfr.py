"""Prototype-based fair representation learning.

Learns K prototype points and per-prototype label weights so that soft
assignments to prototypes reconstruct the features, predict the label, and
carry equal group membership information for the privileged and unprivileged
groups, after Zemel et al. Features are standardized internally; transformed
datasets are reconstructed back on the original scale.

References:
    .. [1] R. Zemel, Y. Wu, K. Swersky, T. Pitassi, and C. Dwork, "Learning
       Fair Representations," ICML, 2013.
"""

from __future__ import annotations

import numpy as np

from ..dataset import GroupSpec, StructuredDataset
from ..errors import ArgumentError, DegenerateDataError, NumericalError, SchemaError
from .base import group_masks, require_fitted

__all__ = ["LFR"]

_CLIP = 1e-6
_MAX_HALVINGS = 50


def _assignments(z: np.ndarray, prototypes: np.ndarray) -> np.ndarray:
    """Row-stochastic softmax over negative squared prototype distances."""
    d2 = (
        (z * z).sum(axis=1)[:, None]
        + (prototypes * prototypes).sum(axis=1)[None, :]
        - 2.0 * (z @ prototypes.T)
    )
    np.maximum(d2, 0.0, out=d2)
    a = -d2
    a -= a.max(axis=1, keepdims=True)
    np.exp(a, out=a)
    a /= a.sum(axis=1, keepdims=True)
    return a


class LFR:
    """Fair-representation pre-processor with a reconstruction/label/parity loss.

    The fitted objective is

        ax * sum_i ||z_i - sum_k d_ik v_k||^2
        + ay * cross_entropy(y, sum_k d_ik w_k)
        + az * sum_k |mean_priv(d_ik) - mean_unpriv(d_ik)|

    over standardized features z, soft assignments d, prototypes v and label
    weights w in [0, 1]. Minimized by seeded gradient descent with halving
    steps that only ever accept an improvement, so the final objective never
    exceeds the initial one. Sums are over rows; instance weights are not
    consulted. ``transform`` replaces features by reconstructions and labels
    by thresholded prototype-label predictions; ``transform_features`` keeps
    the labels for held-out evaluation.
    """

    algorithm_id = "lfr"
    category = "pre"
    modifies_features = True

    def __init__(
        self,
        privileged: GroupSpec,
        unprivileged: GroupSpec,
        k: int = 5,
        ax: float = 0.01,
        ay: float = 1.0,
        az: float = 50.0,
        max_iter: int = 5000,
        seed: int = 0,
    ):
        if int(k) < 1:
            raise ArgumentError(f"prototype count must be >= 1, got {k}")
        for name, value in (("ax", ax), ("ay", ay), ("az", az)):
            if not np.isfinite(value) or value < 0.0:
                raise ArgumentError(f"{name} must be finite and >= 0, got {value}")
        if int(max_iter) < 0:
            raise ArgumentError(f"max_iter must be >= 0, got {max_iter}")
        self.privileged = privileged
        self.unprivileged = unprivileged
        self.k = int(k)
        self.ax = float(ax)
        self.ay = float(ay)
        self.az = float(az)
        self.max_iter = int(max_iter)
        self.seed = int(seed)
        self.prototypes_: np.ndarray | None = None
        self.label_weights_: np.ndarray | None = None
        self.mean_: np.ndarray | None = None
        self.scale_: np.ndarray | None = None
        self.feature_names_: list[str] | None = None
        self.objective_initial_: float | None = None
        self.objective_: float | None = None
        self.n_iter_: int = 0

    def _objective(self, z, y, pmask, umask, prototypes, weights) -> float:
        d = _assignments(z, prototypes)
        resid = d @ prototypes - z
        yhat = np.clip(d @ weights, _CLIP, 1.0 - _CLIP)
        ce = -(y * np.log(yhat) + (1.0 - y) * np.log(1.0 - yhat))
        gap = d[pmask].mean(axis=0) - d[umask].mean(axis=0)
        return float(
            self.ax * (resid * resid).sum()
            + self.ay * ce.sum()
            + self.az * np.abs(gap).sum()
        )

    def _gradients(self, z, y, sgroup, pmask, umask, prototypes, weights):
        d = _assignments(z, prototypes)
        resid = d @ prototypes - z
        yhat = np.clip(d @ weights, _CLIP, 1.0 - _CLIP)
        ce = -(y * np.log(yhat) + (1.0 - y) * np.log(1.0 - yhat))
        gap = d[pmask].mean(axis=0) - d[umask].mean(axis=0)
        loss = float(
            self.ax * (resid * resid).sum()
            + self.ay * ce.sum()
            + self.az * np.abs(gap).sum()
        )
        # dL/dd, then backprop through the row softmax
        ce_d = (yhat - y) / (yhat * (1.0 - yhat))
        g = (2.0 * self.ax) * (resid @ prototypes.T)
        g += self.ay * ce_d[:, None] * weights[None, :]
        g += self.az * np.sign(gap)[None, :] * sgroup[:, None]
        s = d * (g - (d * g).sum(axis=1, keepdims=True))
        grad_v = 2.0 * (s.T @ z - s.sum(axis=0)[:, None] * prototypes)
        grad_v += (2.0 * self.ax) * (d.T @ resid)
        grad_w = self.ay * (d.T @ ce_d)
        return loss, grad_v, grad_w

    def fit(self, ds: StructuredDataset) -> "LFR":
        pmask, umask = group_masks(ds, self.privileged, self.unprivileged)
        if not pmask.any() or not umask.any():
            raise DegenerateDataError(
                "fair representation learning needs rows in both groups"
            )
        x = ds.features
        mean = x.mean(axis=0)
        scale = x.std(axis=0)
        scale = np.where(scale > 0.0, scale, 1.0)
        z = (x - mean) / scale
        y = ds.binary_labels()

        n, dim = z.shape
        rng = np.random.default_rng(self.seed)
        if self.k <= n:
            start = z[rng.choice(n, size=self.k, replace=False)]
            prototypes = start + 0.01 * rng.standard_normal((self.k, dim))
        else:
            prototypes = rng.standard_normal((self.k, dim))
        weights = rng.uniform(0.0, 1.0, size=self.k)
        sgroup = pmask / pmask.sum() - umask / umask.sum()

        loss, grad_v, grad_w = self._gradients(
            z, y, sgroup, pmask, umask, prototypes, weights
        )
        if not np.isfinite(loss):
            raise NumericalError("non-finite objective at initialization")
        initial = loss
        step = 0.1
        n_iter = 0
        for _ in range(self.max_iter):
            accepted = False
            for _ in range(_MAX_HALVINGS):
                v_try = prototypes - step * grad_v
                w_try = np.clip(weights - step * grad_w, 0.0, 1.0)
                trial = self._objective(z, y, pmask, umask, v_try, w_try)
                if np.isfinite(trial) and trial < loss:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break
            prototypes, weights, loss = v_try, w_try, trial
            n_iter += 1
            _, grad_v, grad_w = self._gradients(
                z, y, sgroup, pmask, umask, prototypes, weights
            )
            step = min(step * 2.0, 1e3)
        if not np.isfinite(loss):
            raise NumericalError(f"non-finite objective after {n_iter} iterations")

        self.prototypes_ = prototypes
        self.label_weights_ = weights
        self.mean_ = mean
        self.scale_ = scale
        self.feature_names_ = list(ds.feature_names)
        self.objective_initial_ = initial
        self.objective_ = loss
        self.n_iter_ = n_iter
        return self

    def _encode(self, ds: StructuredDataset) -> tuple[np.ndarray, np.ndarray]:
        require_fitted(self.prototypes_, "LFR")
        if list(ds.feature_names) != self.feature_names_:
            raise SchemaError(
                "dataset features do not match the fitted representation: "
                f"expected {self.feature_names_}, got {list(ds.feature_names)}"
            )
        z = (ds.features - self.mean_) / self.scale_
        d = _assignments(z, self.prototypes_)
        recon = (d @ self.prototypes_) * self.scale_ + self.mean_
        yhat = d @ self.label_weights_
        return recon, yhat

    def _params(self) -> dict:
        return {
            "k": self.k,
            "ax": self.ax,
            "ay": self.ay,
            "az": self.az,
            "seed": self.seed,
        }

    def transform(self, ds: StructuredDataset) -> StructuredDataset:
        recon, yhat = self._encode(ds)
        labels = np.where(yhat > 0.5, ds.favorable_label, ds.unfavorable_label)
        return ds.derive("lfr", self._params(), features=recon, labels=labels)

    def transform_features(self, ds: StructuredDataset) -> StructuredDataset:
        recon, _ = self._encode(ds)
        params = dict(self._params(), features_only=True)
        return ds.derive("lfr", params, features=recon)

    def fit_transform(self, ds: StructuredDataset) -> StructuredDataset:
        return self.fit(ds).transform(ds)

    def state_dict(self) -> dict:
        require_fitted(self.prototypes_, "LFR")
        return {
            "version": 1,
            "algorithm": self.algorithm_id,
            "k": self.k,
            "ax": self.ax,
            "ay": self.ay,
            "az": self.az,
            "max_iter": self.max_iter,
            "seed": self.seed,
            "prototypes": self.prototypes_.tolist(),
            "label_weights": self.label_weights_.tolist(),
            "feature_names": self.feature_names_,
            "mean": self.mean_.tolist(),
            "scale": self.scale_.tolist(),
            "objective": {
                "initial": self.objective_initial_,
                "final": self.objective_,
            },
            "n_iter": self.n_iter_,
        }
