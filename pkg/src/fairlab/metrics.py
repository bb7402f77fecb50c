"""Fairness and accuracy measures over datasets and (true, predicted) pairs.

Dataset metrics read one dataset's labels and weights. Classification
metrics compare a true dataset against a predicted one that shares its
instances, protected attributes, and weights. Sample-distortion metrics
compare feature rows of an original/transformed pair. Confusion counts, the
kernel under every classification metric, are memoized on content digests.
"""

from __future__ import annotations

import hashlib
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .dataset import GroupSpec, StructuredDataset
from .errors import (
    AlignmentError,
    ArgumentError,
    CatalogError,
    NumericalError,
    UndefinedMetricError,
)

__all__ = [
    "ConfusionCounts",
    "MetricContext",
    "METRIC_INFO",
    "accuracy",
    "average_odds_difference",
    "balanced_accuracy",
    "base_rate",
    "confusion_cache",
    "confusion_counts",
    "consistency",
    "disparate_impact",
    "equal_opportunity_difference",
    "evaluate",
    "generalized_entropy_index",
    "group_rate_difference",
    "group_rate_ratio",
    "metric_ids",
    "rate",
    "sample_distortion",
    "statistical_parity_difference",
    "theil_index",
]


# -- group plumbing -----------------------------------------------------------


def _scope_mask(ds: StructuredDataset, group: GroupSpec | None) -> np.ndarray:
    if group is None:
        return np.ones(ds.n_instances, dtype=bool)
    return group.mask(ds)


def _scope_name(group: GroupSpec | None) -> str:
    return "all instances" if group is None else f"group ({group.describe()})"


def _require_nonempty(ds, group, mask: np.ndarray) -> np.ndarray:
    if not mask.any() or float(ds.instance_weights[mask].sum()) <= 0:
        raise UndefinedMetricError(
            f"{_scope_name(group)} selects no weighted instances"
        )
    return mask


def check_aligned(true_ds: StructuredDataset, pred_ds: StructuredDataset) -> None:
    """Raise unless the pair agrees on rows, protection, weights, and labels' coding."""
    if true_ds.n_instances != pred_ds.n_instances:
        raise AlignmentError(
            f"instance count mismatch: {true_ds.n_instances} vs {pred_ds.n_instances}"
        )
    if true_ds.protected_attribute_names != pred_ds.protected_attribute_names:
        raise AlignmentError("protected attribute names differ between datasets")
    if not np.array_equal(true_ds.protected_attributes, pred_ds.protected_attributes):
        raise AlignmentError("protected attribute values differ between datasets")
    if not np.array_equal(true_ds.instance_weights, pred_ds.instance_weights):
        raise AlignmentError("instance weights differ between datasets")
    if (true_ds.favorable_label, true_ds.unfavorable_label) != (
        pred_ds.favorable_label,
        pred_ds.unfavorable_label,
    ):
        raise AlignmentError("favorable/unfavorable label coding differs")


class MetricContext:
    """One dataset (or a true/predicted pair) plus the two comparison groups.

    Validates that the group specs name real protected attributes and select
    disjoint instance sets, and that a predicted dataset is row-aligned with
    the true one.
    """

    def __init__(
        self,
        dataset: StructuredDataset,
        privileged: GroupSpec,
        unprivileged: GroupSpec,
        predicted: StructuredDataset | None = None,
    ):
        privileged.validate(dataset)
        unprivileged.validate(dataset)
        overlap = privileged.mask(dataset) & unprivileged.mask(dataset)
        if overlap.any():
            raise ArgumentError(
                f"privileged ({privileged.describe()}) and unprivileged "
                f"({unprivileged.describe()}) overlap on {int(overlap.sum())} instance(s)"
            )
        if predicted is not None:
            check_aligned(dataset, predicted)
        self.dataset = dataset
        self.privileged = privileged
        self.unprivileged = unprivileged
        self.predicted = predicted

    def value(self, metric_id: str, **params) -> float:
        return evaluate(
            metric_id,
            self.dataset,
            predicted=self.predicted,
            privileged=self.privileged,
            unprivileged=self.unprivileged,
            **params,
        )


# -- dataset metrics ----------------------------------------------------------


def base_rate(ds: StructuredDataset, group: GroupSpec | None = None) -> float:
    """Weighted fraction of favorable labels in scope."""
    mask = _require_nonempty(ds, group, _scope_mask(ds, group))
    w = ds.instance_weights[mask]
    fav = ds.favorable_mask()[mask]
    return float(w[fav].sum() / w.sum())


def statistical_parity_difference(
    ds: StructuredDataset, privileged: GroupSpec, unprivileged: GroupSpec
) -> float:
    """base_rate(unprivileged) - base_rate(privileged); 0 is parity."""
    return base_rate(ds, unprivileged) - base_rate(ds, privileged)


def disparate_impact(
    ds: StructuredDataset, privileged: GroupSpec, unprivileged: GroupSpec
) -> float:
    """base_rate(unprivileged) / base_rate(privileged); 1 is parity.

    A zero privileged rate with a positive unprivileged rate is reported as
    +inf rather than an exception; 0/0 is undefined.
    """
    up = base_rate(ds, unprivileged)
    p = base_rate(ds, privileged)
    if p == 0.0:
        if up == 0.0:
            raise UndefinedMetricError(
                "disparate impact undefined: privileged base rate is 0 and "
                "unprivileged base rate is 0"
            )
        return math.inf
    return up / p


def _knn_disagreement(features: np.ndarray, labels: np.ndarray, k: int) -> float:
    """Sum over instances of summed |y_i - y_j| over k nearest neighbors.

    Euclidean distance, self excluded, distance ties broken by ascending row
    index. Chunked so the full pairwise matrix is never materialized.
    """
    n = features.shape[0]
    total = 0.0
    chunk = max(1, min(n, int(2**24 // max(n, 1))))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        diff = features[start:stop, None, :] - features[None, :, :]
        d2 = (diff * diff).sum(axis=-1)
        for r in range(stop - start):
            i = start + r
            row = d2[r].copy()
            row[i] = np.inf
            # kth-smallest value, then an exact stable selection among <= it
            kth = np.partition(row, k - 1)[k - 1]
            cand = np.flatnonzero(row <= kth)
            order = cand[np.argsort(row[cand], kind="stable")]
            total += float(np.abs(labels[i] - labels[order[:k]]).sum())
    return total


def consistency(
    ds: StructuredDataset, k: int = 5, standardize: bool = False
) -> float:
    """1 - mean label disagreement with the k nearest feature-space neighbors.

    Unweighted by design; the neighborhood structure ignores instance
    weights. ``standardize`` switches to z-scored features (off by default).
    """
    n = ds.n_instances
    if k < 1:
        raise ArgumentError(f"k must be >= 1, got {k}")
    if k >= n:
        raise ArgumentError(f"k ({k}) must be smaller than the instance count ({n})")
    x = np.asarray(ds.features, dtype=float)
    if standardize:
        sd = x.std(axis=0)
        sd[sd == 0] = 1.0
        x = (x - x.mean(axis=0)) / sd
    disagreement = _knn_disagreement(x, ds.binary_labels(), k)
    return 1.0 - disagreement / (n * k)


# -- confusion kernel ---------------------------------------------------------


@dataclass(frozen=True)
class ConfusionCounts:
    """Weighted confusion cells for one (true, predicted, scope) triple."""

    tp: float
    fp: float
    tn: float
    fn: float

    @property
    def positives(self) -> float:
        return self.tp + self.fn

    @property
    def negatives(self) -> float:
        return self.fp + self.tn

    @property
    def total(self) -> float:
        return self.tp + self.fp + self.tn + self.fn


class _ConfusionCache:
    """Thread-safe LRU over confusion counts, keyed on content digests."""

    def __init__(self, maxsize: int = 256):
        self.maxsize = maxsize
        self._store: OrderedDict[str, ConfusionCounts] = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get_or_compute(self, key: str, producer) -> ConfusionCounts:
        with self._lock:
            if key in self._store:
                self.hits += 1
                self._store.move_to_end(key)
                return self._store[key]
        value = producer()
        with self._lock:
            self.misses += 1
            self._store[key] = value
            self._store.move_to_end(key)
            while len(self._store) > self.maxsize:
                self._store.popitem(last=False)
        return value

    def clear(self) -> None:
        with self._lock:
            self._store.clear()
            self.hits = 0
            self.misses = 0

    def stats(self) -> dict:
        with self._lock:
            return {"size": len(self._store), "hits": self.hits, "misses": self.misses}


confusion_cache = _ConfusionCache()


def _group_key(group: GroupSpec | None) -> str:
    if group is None:
        return "all"
    payload = repr(sorted(tuple(sorted(c.items())) for c in group.clauses))
    return hashlib.blake2b(payload.encode(), digest_size=8).hexdigest()


def confusion_counts(
    true_ds: StructuredDataset,
    pred_ds: StructuredDataset,
    group: GroupSpec | None = None,
) -> ConfusionCounts:
    """Weighted TP/FP/TN/FN of the pair restricted to scope; memoized."""
    check_aligned(true_ds, pred_ds)
    key = "|".join(
        (true_ds.content_digest(), pred_ds.content_digest(), _group_key(group))
    )

    def compute() -> ConfusionCounts:
        mask = _require_nonempty(true_ds, group, _scope_mask(true_ds, group))
        w = true_ds.instance_weights[mask]
        t = true_ds.favorable_mask()[mask]
        p = pred_ds.favorable_mask()[mask]
        return ConfusionCounts(
            tp=float(w[t & p].sum()),
            fp=float(w[~t & p].sum()),
            tn=float(w[~t & ~p].sum()),
            fn=float(w[t & ~p].sum()),
        )

    return confusion_cache.get_or_compute(key, compute)


_RATE_KINDS = ("tpr", "fpr", "tnr", "fnr", "ppv", "fdr", "accuracy", "balanced_accuracy")


def rate(counts: ConfusionCounts, kind: str) -> float:
    """One scalar rate off the confusion cells; zero denominators are errors."""

    def safe(num: float, den: float, what: str) -> float:
        if den <= 0:
            raise UndefinedMetricError(f"{kind} undefined: no {what} in scope")
        return num / den

    if kind == "tpr":
        return safe(counts.tp, counts.positives, "positive instances")
    if kind == "fnr":
        return safe(counts.fn, counts.positives, "positive instances")
    if kind == "fpr":
        return safe(counts.fp, counts.negatives, "negative instances")
    if kind == "tnr":
        return safe(counts.tn, counts.negatives, "negative instances")
    if kind == "ppv":
        return safe(counts.tp, counts.tp + counts.fp, "predicted positives")
    if kind == "fdr":
        return safe(counts.fp, counts.tp + counts.fp, "predicted positives")
    if kind == "accuracy":
        return safe(counts.tp + counts.tn, counts.total, "instances")
    if kind == "balanced_accuracy":
        return 0.5 * (rate(counts, "tpr") + rate(counts, "tnr"))
    raise ArgumentError(f"unknown rate kind {kind!r}; one of {_RATE_KINDS}")


def group_rate_difference(true_ds, pred_ds, privileged, unprivileged, kind) -> float:
    """rate(unprivileged) - rate(privileged) for one confusion rate kind."""
    u = rate(confusion_counts(true_ds, pred_ds, unprivileged), kind)
    p = rate(confusion_counts(true_ds, pred_ds, privileged), kind)
    return u - p


def group_rate_ratio(true_ds, pred_ds, privileged, unprivileged, kind) -> float:
    u = rate(confusion_counts(true_ds, pred_ds, unprivileged), kind)
    p = rate(confusion_counts(true_ds, pred_ds, privileged), kind)
    if p == 0.0:
        if u == 0.0:
            raise UndefinedMetricError(f"{kind} ratio undefined: both group rates are 0")
        return math.inf
    return u / p


def average_odds_difference(true_ds, pred_ds, privileged, unprivileged) -> float:
    """Mean of the FPR difference and the TPR difference across groups."""
    return 0.5 * (
        group_rate_difference(true_ds, pred_ds, privileged, unprivileged, "fpr")
        + group_rate_difference(true_ds, pred_ds, privileged, unprivileged, "tpr")
    )


def equal_opportunity_difference(true_ds, pred_ds, privileged, unprivileged) -> float:
    """TPR difference across groups (unprivileged minus privileged)."""
    return group_rate_difference(true_ds, pred_ds, privileged, unprivileged, "tpr")


def accuracy(true_ds, pred_ds, group: GroupSpec | None = None) -> float:
    return rate(confusion_counts(true_ds, pred_ds, group), "accuracy")


def balanced_accuracy(true_ds, pred_ds, group: GroupSpec | None = None) -> float:
    return rate(confusion_counts(true_ds, pred_ds, group), "balanced_accuracy")


# -- benefit-based inequality metrics ----------------------------------------


def _benefits(true_ds, pred_ds) -> tuple[np.ndarray, np.ndarray]:
    check_aligned(true_ds, pred_ds)
    b = pred_ds.binary_labels() - true_ds.binary_labels() + 1.0
    return b, true_ds.instance_weights


def generalized_entropy_index(true_ds, pred_ds, alpha: float = 2.0) -> float:
    """Inequality of per-instance benefit b = prediction - label + 1.

    GE(alpha) = (1/(W*alpha*(alpha-1))) * sum(w * ((b/mu)^alpha - 1)) with mu
    the weighted mean benefit; alpha = 1 routes to the Theil limit. Zero is
    perfect equality of benefits.
    """
    if alpha == 1.0:
        return theil_index(true_ds, pred_ds)
    if alpha <= 0.0:
        raise ArgumentError(f"alpha must be positive (got {alpha}); 1 is the Theil limit")
    b, w = _benefits(true_ds, pred_ds)
    total = float(w.sum())
    mu = float((w * b).sum() / total)
    if mu <= 0.0:
        raise UndefinedMetricError("generalized entropy undefined: mean benefit is 0")
    return float((w * ((b / mu) ** alpha - 1.0)).sum() / (total * alpha * (alpha - 1.0)))


def theil_index(true_ds, pred_ds) -> float:
    """Theil inequality of benefits: (1/W) * sum(w * (b/mu) * ln(b/mu)), 0 ln 0 = 0."""
    b, w = _benefits(true_ds, pred_ds)
    total = float(w.sum())
    mu = float((w * b).sum() / total)
    if mu <= 0.0:
        raise UndefinedMetricError("Theil index undefined: mean benefit is 0")
    ratio = b / mu
    terms = np.zeros_like(ratio)
    pos = ratio > 0
    terms[pos] = ratio[pos] * np.log(ratio[pos])
    return float((w * terms).sum() / total)


# -- sample distortion --------------------------------------------------------

_DISTANCES = ("euclidean", "manhattan", "mahalanobis")
_AGGREGATES = ("total", "average", "maximum")


def sample_distortion(
    orig: StructuredDataset,
    transf: StructuredDataset,
    distance: str = "euclidean",
    aggregate: str = "average",
    group: GroupSpec | None = None,
) -> float:
    """Aggregated per-instance distance between paired feature rows.

    Instance weights are not consulted: the aggregate is over rows in scope.
    Mahalanobis uses the inverse feature covariance of ``orig``.
    """
    if distance not in _DISTANCES:
        raise ArgumentError(f"unknown distance {distance!r}; one of {_DISTANCES}")
    if aggregate not in _AGGREGATES:
        raise ArgumentError(f"unknown aggregate {aggregate!r}; one of {_AGGREGATES}")
    if orig.n_instances != transf.n_instances:
        raise AlignmentError(
            f"instance count mismatch: {orig.n_instances} vs {transf.n_instances}"
        )
    if orig.feature_names != transf.feature_names:
        raise AlignmentError("feature names differ; distortion needs paired columns")

    mask = _require_nonempty(orig, group, _scope_mask(orig, group))
    delta = orig.features[mask] - transf.features[mask]
    if distance == "euclidean":
        d = np.sqrt((delta * delta).sum(axis=1))
    elif distance == "manhattan":
        d = np.abs(delta).sum(axis=1)
    else:
        cov = np.cov(orig.features, rowvar=False)
        cov = np.atleast_2d(cov)
        try:
            inv = np.linalg.inv(cov)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                "feature covariance is singular; regularize or drop "
                "constant/collinear columns before mahalanobis distortion"
            ) from exc
        d = np.sqrt(np.maximum((delta @ inv * delta).sum(axis=1), 0.0))

    if aggregate == "total":
        return float(d.sum())
    if aggregate == "average":
        return float(d.mean())
    return float(d.max())


# -- catalog ------------------------------------------------------------------


@dataclass(frozen=True)
class MetricInfo:
    metric_id: str
    kind: str  # dataset | classification | individual
    ideal: float | None
    definition: str
    greater_is_fairer: bool = False


METRIC_INFO: dict[str, MetricInfo] = {
    m.metric_id: m
    for m in [
        MetricInfo(
            "base_rate",
            "dataset",
            None,
            "Weighted fraction of favorable labels in scope.",
        ),
        MetricInfo(
            "statistical_parity_difference",
            "dataset",
            0.0,
            "Difference in weighted favorable-label rates, unprivileged minus privileged.",
        ),
        MetricInfo(
            "disparate_impact",
            "dataset",
            1.0,
            "Ratio of weighted favorable-label rates, unprivileged over privileged.",
        ),
        MetricInfo(
            "consistency",
            "individual",
            1.0,
            "One minus the mean label disagreement with each instance's k nearest "
            "feature-space neighbors.",
            greater_is_fairer=True,
        ),
        MetricInfo(
            "average_odds_difference",
            "classification",
            0.0,
            "Mean of the false-positive-rate and true-positive-rate differences, "
            "unprivileged minus privileged.",
        ),
        MetricInfo(
            "equal_opportunity_difference",
            "classification",
            0.0,
            "True-positive-rate difference, unprivileged minus privileged.",
        ),
        MetricInfo(
            "generalized_entropy_index",
            "classification",
            0.0,
            "Inequality across per-instance benefits (prediction - label + 1) at "
            "order alpha.",
        ),
        MetricInfo(
            "theil_index",
            "classification",
            0.0,
            "Benefit inequality at the alpha = 1 limit of the generalized entropy "
            "index.",
        ),
        MetricInfo(
            "accuracy",
            "classification",
            1.0,
            "Weighted fraction of instances whose predicted label matches the true "
            "label.",
            greater_is_fairer=True,
        ),
        MetricInfo(
            "balanced_accuracy",
            "classification",
            1.0,
            "Mean of the true-positive rate and the true-negative rate.",
            greater_is_fairer=True,
        ),
    ]
}


def metric_ids() -> list[str]:
    return list(METRIC_INFO)


def evaluate(
    metric_id: str,
    dataset: StructuredDataset,
    predicted: StructuredDataset | None = None,
    privileged: GroupSpec | None = None,
    unprivileged: GroupSpec | None = None,
    **params,
) -> float:
    """Dispatch one metric by catalog id.

    Dataset-kind metrics evaluate on the predicted dataset when one is given
    (bias of the decisions), otherwise on ``dataset`` itself. Classification
    metrics require the pair.
    """
    if metric_id not in METRIC_INFO:
        raise CatalogError(f"unknown metric {metric_id!r}", valid=metric_ids())
    info = METRIC_INFO[metric_id]
    needs_groups = metric_id in (
        "statistical_parity_difference",
        "disparate_impact",
        "average_odds_difference",
        "equal_opportunity_difference",
    )
    if needs_groups and (privileged is None or unprivileged is None):
        raise ArgumentError(f"{metric_id} needs privileged and unprivileged groups")
    if info.kind == "classification" and predicted is None:
        raise ArgumentError(f"{metric_id} needs a predicted dataset")

    target = predicted if (predicted is not None and info.kind != "classification") else dataset
    if metric_id == "base_rate":
        return base_rate(target, params.get("group"))
    if metric_id == "statistical_parity_difference":
        return statistical_parity_difference(target, privileged, unprivileged)
    if metric_id == "disparate_impact":
        return disparate_impact(target, privileged, unprivileged)
    if metric_id == "consistency":
        return consistency(
            target, k=params.get("k", 5), standardize=params.get("standardize", False)
        )
    if metric_id == "average_odds_difference":
        return average_odds_difference(dataset, predicted, privileged, unprivileged)
    if metric_id == "equal_opportunity_difference":
        return equal_opportunity_difference(dataset, predicted, privileged, unprivileged)
    if metric_id == "generalized_entropy_index":
        return generalized_entropy_index(dataset, predicted, alpha=params.get("alpha", 2.0))
    if metric_id == "theil_index":
        return theil_index(dataset, predicted)
    if metric_id == "accuracy":
        return accuracy(dataset, predicted, params.get("group"))
    return balanced_accuracy(dataset, predicted, params.get("group"))
