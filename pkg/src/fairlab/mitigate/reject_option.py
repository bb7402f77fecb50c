"""Decision-boundary band relabeling with a fairness-constrained grid search.

Inside a critical band around the classification threshold, unprivileged
instances receive the favorable label and privileged instances the
unfavorable one; outside the band the threshold decides, after Kamiran et
al. Fitting scans a threshold/margin grid on validation data and keeps the
pair with the best balanced accuracy whose fairness deviation stays within
epsilon; when no pair qualifies it falls back to the smallest deviation and
flags the result.
"""

from __future__ import annotations

import numpy as np

from ..dataset import GroupSpec, StructuredDataset
from ..errors import ArgumentError, CatalogError, DegenerateDataError
from ..metrics import check_aligned
from ..model import ScoredPredictions
from .base import group_masks, require_fitted

__all__ = ["RejectOptionClassifier"]

_METRICS = (
    "statistical_parity_difference",
    "disparate_impact",
    "average_odds_difference",
    "equal_opportunity_difference",
)


def _band_labels(scores, threshold, margin, pmask, umask) -> np.ndarray:
    """Favorable-prediction mask under the band rule."""
    fav = scores > threshold
    band = np.abs(scores - threshold) <= margin
    fav = fav.copy()
    fav[band & umask] = True
    fav[band & pmask] = False
    return fav


def _deviation(metric, fav, y, w, pmask, umask) -> float:
    """Distance from the metric's ideal; +inf when the metric is undefined."""
    wp, wu = float(w[pmask].sum()), float(w[umask].sum())
    if wp == 0.0 or wu == 0.0:
        return np.inf
    rate_p = float(w[pmask & fav].sum()) / wp
    rate_u = float(w[umask & fav].sum()) / wu
    if metric == "statistical_parity_difference":
        return abs(rate_u - rate_p)
    if metric == "disparate_impact":
        if rate_p == 0.0:
            return np.inf
        return abs(rate_u / rate_p - 1.0)
    pos = y == 1.0
    gaps = []
    for cond in ((pos,) if metric == "equal_opportunity_difference" else (pos, ~pos)):
        denom_p = float(w[pmask & cond].sum())
        denom_u = float(w[umask & cond].sum())
        if denom_p == 0.0 or denom_u == 0.0:
            return np.inf
        gaps.append(
            float(w[umask & cond & fav].sum()) / denom_u
            - float(w[pmask & cond & fav].sum()) / denom_p
        )
    return abs(float(np.mean(gaps)))


class RejectOptionClassifier:
    """Threshold/margin pair fit on validation scores under a fairness bound.

    The deviation being bounded is |metric - ideal|: statistical parity,
    average odds and equal opportunity differences are compared to 0,
    disparate impact to 1. ``feasible_`` records whether any grid pair met
    the bound; when it is False the stored pair minimizes the deviation
    instead.
    """

    algorithm_id = "reject_option"
    category = "post"
    modifies_features = False

    def __init__(
        self,
        privileged: GroupSpec,
        unprivileged: GroupSpec,
        metric: str = "statistical_parity_difference",
        epsilon: float = 0.05,
        num_thresholds: int = 50,
        num_margins: int = 50,
        margin_max: float = 0.5,
    ):
        if metric not in _METRICS:
            raise CatalogError(
                f"unsupported fairness constraint {metric!r}", valid=list(_METRICS)
            )
        if epsilon < 0.0:
            raise ArgumentError("epsilon must be nonnegative")
        if num_thresholds < 1 or num_margins < 1:
            raise ArgumentError("threshold and margin grids must be nonempty")
        if not 0.0 < margin_max <= 0.5:
            raise ArgumentError("margin_max must lie in (0, 0.5]")
        self.privileged = privileged
        self.unprivileged = unprivileged
        self.metric = metric
        self.epsilon = float(epsilon)
        self.num_thresholds = int(num_thresholds)
        self.num_margins = int(num_margins)
        self.margin_max = float(margin_max)
        self.threshold_: float | None = None
        self.margin_: float | None = None
        self.feasible_: bool | None = None
        self.balanced_accuracy_: float | None = None
        self.deviation_: float | None = None

    def fit(
        self, true_ds: StructuredDataset, scored: ScoredPredictions
    ) -> "RejectOptionClassifier":
        check_aligned(true_ds, scored.dataset)
        pmask, umask = group_masks(true_ds, self.privileged, self.unprivileged)
        if not pmask.any() or not umask.any():
            raise DegenerateDataError("validation data must contain both groups")
        y = true_ds.binary_labels()
        w = true_ds.instance_weights
        wpos = float(w[y == 1.0].sum())
        wneg = float(w[y == 0.0].sum())
        if wpos == 0.0 or wneg == 0.0:
            raise DegenerateDataError("validation data carries weight on only one class")

        thresholds = np.linspace(0.01, 0.99, self.num_thresholds)
        margins = np.linspace(0.01, self.margin_max, self.num_margins)
        scores = scored.scores

        best = None  # (bal_acc, t, m, deviation), feasible pairs only
        fallback = None  # minimal deviation pair
        for t in thresholds:
            for m in margins:
                fav = _band_labels(scores, t, m, pmask, umask)
                tpw = float(w[fav & (y == 1.0)].sum())
                tnw = float(w[~fav & (y == 0.0)].sum())
                bal = 0.5 * (tpw / wpos + tnw / wneg)
                dev = _deviation(self.metric, fav, y, w, pmask, umask)
                if dev <= self.epsilon and (best is None or bal > best[0]):
                    best = (bal, t, m, dev)
                if fallback is None or dev < fallback[3]:
                    fallback = (bal, t, m, dev)

        self.feasible_ = best is not None
        chosen = best if best is not None else fallback
        self.balanced_accuracy_, self.threshold_, self.margin_, self.deviation_ = chosen
        return self

    def apply(self, scored: ScoredPredictions) -> StructuredDataset:
        require_fitted(self.threshold_, "RejectOptionClassifier")
        ds = scored.dataset
        pmask, umask = group_masks(ds, self.privileged, self.unprivileged)
        fav = _band_labels(scored.scores, self.threshold_, self.margin_, pmask, umask)
        labels = np.where(fav, ds.favorable_label, ds.unfavorable_label)
        return ds.derive(
            "reject_option",
            {
                "threshold": self.threshold_,
                "margin": self.margin_,
                "metric": self.metric,
                "feasible": self.feasible_,
            },
            labels=labels,
            metadata={"scores": scored.scores},
        )

    def state_dict(self) -> dict:
        require_fitted(self.threshold_, "RejectOptionClassifier")
        return {
            "version": 1,
            "algorithm": self.algorithm_id,
            "metric": self.metric,
            "epsilon": self.epsilon,
            "threshold": self.threshold_,
            "margin": self.margin_,
            "feasible": self.feasible_,
            "balanced_accuracy": self.balanced_accuracy_,
            "deviation": self.deviation_,
        }
