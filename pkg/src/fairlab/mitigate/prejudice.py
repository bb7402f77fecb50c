"""In-processing logistic learner with a prejudice penalty.

Fits one logistic parameter vector per protected group and adds eta times an
empirical prejudice index to the training loss, after Kamishima et al. The
index is the sample mutual information between the model's score and group
membership, estimated from the model outputs themselves:

    PI = sum_i w_i * [ q_i*ln(qbar_g/qbar) + (1-q_i)*ln((1-qbar_g)/(1-qbar)) ]

with q_i the row's predicted favorable probability, qbar_g its group's
weighted mean prediction and qbar the overall weighted mean. Group and
overall means are clamped away from {0, 1} before the logs, so the penalty
stays finite on saturated fits; the clamp only binds in that edge case.
Aggregated per group the index equals sum_g W_g * KL(qbar_g || qbar), hence
it is nonnegative everywhere.

References:
    .. [1] T. Kamishima, S. Akaho, H. Asoh, and J. Sakuma,
       "Fairness-Aware Classifier with Prejudice Remover Regularizer,"
       ECML PKDD, 2012.
"""

from __future__ import annotations

import hashlib

import numpy as np

from ..dataset import GroupSpec, StructuredDataset
from ..errors import ArgumentError, DegenerateDataError, NumericalError, SchemaError
from ..model import ScoredPredictions, _sigmoid, _softplus, apply_threshold
from .base import group_masks, require_fitted

__all__ = ["PrejudiceRemover"]

_PCLIP = 1e-12
_GROUPS = ("privileged", "unprivileged")


class PrejudiceRemover:
    """Per-group logistic regression penalized by group/score mutual information.

    Minimizes, over one coefficient vector and intercept per group,

        (1/W) * [ weighted NLL + eta * PI ]
        + (l2/2) * sum_g (W_g/W) * ||coef_g||^2

    so that at eta = 0 the problem decouples into the per-group fits of
    ``fit_logistic`` with the same l2. Intercepts are unpenalized. Every row
    must belong to exactly one of the two groups, both at fit and at predict
    time, because prediction uses the group-matched parameters.
    """

    algorithm_id = "prejudice_remover"
    category = "in"
    modifies_features = False

    def __init__(
        self,
        privileged: GroupSpec,
        unprivileged: GroupSpec,
        eta: float = 1.0,
        l2: float = 1e-4,
        max_iter: int = 300,
        tol: float = 1e-6,
        learning_rate: float = 1.0,
        standardize: bool = True,
    ):
        if not np.isfinite(eta) or eta < 0.0:
            raise ArgumentError(f"eta must be finite and >= 0, got {eta}")
        if l2 < 0.0:
            raise ArgumentError("l2 strength must be nonnegative")
        if int(max_iter) < 0:
            raise ArgumentError("max_iter must be nonnegative")
        if tol <= 0.0:
            raise ArgumentError("tolerance must be positive")
        if learning_rate <= 0.0:
            raise ArgumentError("learning_rate must be positive")
        self.privileged = privileged
        self.unprivileged = unprivileged
        self.eta = float(eta)
        self.l2 = float(l2)
        self.max_iter = int(max_iter)
        self.tol = float(tol)
        self.learning_rate = float(learning_rate)
        self.standardize = bool(standardize)
        self.coef_: np.ndarray | None = None
        self.intercept_: np.ndarray | None = None
        self.mean_: np.ndarray | None = None
        self.scale_: np.ndarray | None = None
        self.feature_names_: tuple | None = None
        self.n_iter_: int = 0
        self.converged_: bool = False
        self.prejudice_index_: float | None = None

    def _masks(self, ds: StructuredDataset) -> tuple[np.ndarray, np.ndarray]:
        pmask, umask = group_masks(ds, self.privileged, self.unprivileged)
        uncovered = int((~(pmask | umask)).sum())
        if uncovered:
            raise ArgumentError(
                f"{uncovered} instance(s) belong to neither group; the prejudice "
                "remover needs the two groups to cover every row"
            )
        return pmask, umask

    def _loss_grad(self, x, y, w, masks, coef, intercept):
        total = float(w.sum())
        z = np.empty(y.shape[0])
        for gi, mask in enumerate(masks):
            z[mask] = x[mask] @ coef[gi] + intercept[gi]
        q = _sigmoid(z)
        nll = float((w * (_softplus(z) - y * z)).sum())

        qbar = float(np.clip((w * q).sum() / total, _PCLIP, 1.0 - _PCLIP))
        pi_sum = 0.0
        delta = np.empty(2)
        group_w = np.empty(2)
        for gi, mask in enumerate(masks):
            wg = float(w[mask].sum())
            qg = float(np.clip((w[mask] * q[mask]).sum() / wg, _PCLIP, 1.0 - _PCLIP))
            pi_sum += wg * (
                qg * np.log(qg / qbar) + (1.0 - qg) * np.log((1.0 - qg) / (1.0 - qbar))
            )
            delta[gi] = np.log(qg / (1.0 - qg)) - np.log(qbar / (1.0 - qbar))
            group_w[gi] = wg

        penalty = 0.0
        grad_coef = np.zeros_like(coef)
        grad_int = np.zeros(2)
        for gi, mask in enumerate(masks):
            share = group_w[gi] / total
            penalty += 0.5 * self.l2 * share * float(coef[gi] @ coef[gi])
            qm = q[mask]
            r = w[mask] * (
                (qm - y[mask]) + self.eta * delta[gi] * qm * (1.0 - qm)
            )
            grad_coef[gi] = x[mask].T @ r / total + self.l2 * share * coef[gi]
            grad_int[gi] = float(r.sum()) / total

        loss = (nll + self.eta * pi_sum) / total + penalty
        return loss, grad_coef, grad_int, pi_sum / total

    def fit(self, ds: StructuredDataset) -> "PrejudiceRemover":
        masks = self._masks(ds)
        y = ds.binary_labels()
        w = ds.instance_weights
        for name, mask in zip(_GROUPS, masks):
            for lname, lval in (("favorable", 1.0), ("unfavorable", 0.0)):
                if float(w[mask & (y == lval)].sum()) == 0.0:
                    raise DegenerateDataError(
                        f"{name} group carries no weight on the {lname} class"
                    )

        x = np.asarray(ds.features, dtype=float)
        mean = scale = None
        if self.standardize:
            total = float(w.sum())
            mean = (w[:, None] * x).sum(axis=0) / total
            var = (w[:, None] * (x - mean) ** 2).sum(axis=0) / total
            scale = np.sqrt(var)
            scale[scale == 0.0] = 1.0
            x = (x - mean) / scale

        coef = np.zeros((2, x.shape[1]))
        intercept = np.zeros(2)
        loss, g_coef, g_int, pi = self._loss_grad(x, y, w, masks, coef, intercept)
        step = self.learning_rate
        n_iter = 0
        converged = False
        for i in range(self.max_iter):
            if not np.isfinite(loss):
                raise NumericalError(f"non-finite loss at iteration {i}")
            grad_sq = float((g_coef * g_coef).sum()) + float(g_int @ g_int)
            if np.sqrt(grad_sq) <= self.tol:
                converged = True
                break
            accepted = False
            for _ in range(60):
                new_coef = coef - step * g_coef
                new_int = intercept - step * g_int
                new_loss, new_g_coef, new_g_int, new_pi = self._loss_grad(
                    x, y, w, masks, new_coef, new_int
                )
                if np.isfinite(new_loss) and new_loss <= loss - 1e-4 * step * grad_sq:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break  # step underflow: no further progress possible
            coef, intercept = new_coef, new_int
            loss, g_coef, g_int, pi = new_loss, new_g_coef, new_g_int, new_pi
            step = min(step * 2.0, 1e6)
            n_iter = i + 1
        else:
            grad_sq = float((g_coef * g_coef).sum()) + float(g_int @ g_int)
            converged = np.sqrt(grad_sq) <= self.tol

        self.coef_ = coef
        self.intercept_ = intercept
        self.mean_ = mean
        self.scale_ = scale
        self.feature_names_ = tuple(ds.feature_names)
        self.n_iter_ = n_iter
        self.converged_ = converged
        self.prejudice_index_ = float(pi)
        return self

    def digest(self) -> str:
        require_fitted(self.coef_, "PrejudiceRemover")
        h = hashlib.blake2b(digest_size=8)
        h.update(np.ascontiguousarray(self.coef_).tobytes())
        h.update(np.ascontiguousarray(self.intercept_).tobytes())
        h.update(repr(self.feature_names_).encode())
        return h.hexdigest()

    def predict_scores(self, ds: StructuredDataset) -> ScoredPredictions:
        require_fitted(self.coef_, "PrejudiceRemover")
        if tuple(ds.feature_names) != self.feature_names_:
            raise SchemaError(
                "feature names do not match the fitted model; expected "
                f"{list(self.feature_names_)[:5]}..."
            )
        masks = self._masks(ds)
        x = np.asarray(ds.features, dtype=float)
        if self.mean_ is not None:
            x = (x - self.mean_) / self.scale_
        z = np.empty(ds.n_instances)
        for gi, mask in enumerate(masks):
            z[mask] = x[mask] @ self.coef_[gi] + self.intercept_[gi]
        return ScoredPredictions(
            dataset=ds, scores=_sigmoid(z), model_digest=self.digest()
        )

    def predict(self, ds: StructuredDataset, threshold: float = 0.5) -> StructuredDataset:
        return apply_threshold(self.predict_scores(ds), threshold)

    def state_dict(self) -> dict:
        require_fitted(self.coef_, "PrejudiceRemover")
        return {
            "version": 1,
            "algorithm": self.algorithm_id,
            "eta": self.eta,
            "l2": self.l2,
            "groups": {
                name: {
                    "coefficients": self.coef_[gi].tolist(),
                    "intercept": float(self.intercept_[gi]),
                }
                for gi, name in enumerate(_GROUPS)
            },
            "feature_names": list(self.feature_names_),
            "standardization": (
                None
                if self.mean_ is None
                else {"mean": self.mean_.tolist(), "scale": self.scale_.tolist()}
            ),
            "n_iter": self.n_iter_,
            "converged": self.converged_,
            "prejudice_index": self.prejudice_index_,
        }
