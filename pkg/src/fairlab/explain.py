"""Plain-text and JSON explanations of metric values, plus bias localization.

Each explanation carries exactly three top-level attributes: ``meta`` (metric
name, definition, ideal value), ``stats`` (raw ingredients and the exact
value), and ``text`` (one sentence). Localization drills into raw protected
attribute values or feature categories and flags segments that deviate from
the dataset-level value beyond a threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .dataset import StructuredDataset
from .errors import ArgumentError, CapabilityError, UndefinedMetricError
from .metrics import METRIC_INFO, MetricContext

__all__ = [
    "BiasSegment",
    "ExplanationRecord",
    "explain_json",
    "explain_text",
    "format_number",
    "localize_feature",
    "localize_protected",
]

_TITLES = {
    "base_rate": "Base rate (weighted favorable fraction)",
    "statistical_parity_difference": (
        "Statistical parity difference (unprivileged minus privileged favorable rate)"
    ),
    "disparate_impact": (
        "Disparate impact (ratio of unprivileged to privileged favorable rate)"
    ),
    "consistency": "Consistency with the {k} nearest neighbors",
    "average_odds_difference": (
        "Average odds difference (mean of the FPR and TPR gaps)"
    ),
    "equal_opportunity_difference": (
        "Equal opportunity difference (true positive rate gap)"
    ),
    "generalized_entropy_index": "Generalized entropy index (alpha={alpha}) of benefits",
    "theil_index": "Theil index of benefits",
    "accuracy": "Classification accuracy",
    "balanced_accuracy": "Balanced classification accuracy",
}


def format_number(x: float) -> str:
    """Fixed 4-decimal formatting with trailing zeros trimmed (0.9 not 0.9000)."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "undefined"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    out = f"{x:.4f}".rstrip("0").rstrip(".")
    return "0" if out in ("-0", "") else out


@dataclass
class ExplanationRecord:
    """The three-part explanation consumed by the service and UI."""

    meta: dict
    stats: dict
    text: str

    def to_dict(self) -> dict:
        return {"meta": dict(self.meta), "stats": dict(self.stats), "text": self.text}

    @classmethod
    def from_dict(cls, raw: dict) -> "ExplanationRecord":
        return cls(meta=dict(raw["meta"]), stats=dict(raw["stats"]), text=str(raw["text"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _scope_group(ctx: MetricContext, scope: str):
    if scope == "all":
        return None
    if scope == "privileged":
        return ctx.privileged
    if scope == "unprivileged":
        return ctx.unprivileged
    raise ArgumentError(f"unknown scope {scope!r}; one of all|privileged|unprivileged")


def _scope_phrase(scope: str) -> str:
    return "instances" if scope == "all" else f"{scope} instances"


def _stats_for(metric_id, ctx, scope, value, params) -> dict:
    ds = ctx.dataset
    group = _scope_group(ctx, scope)
    stats: dict = {}
    if metric_id in ("statistical_parity_difference", "disparate_impact"):
        stats["base_rate_privileged"] = metrics.base_rate(_target(ctx), ctx.privileged)
        stats["base_rate_unprivileged"] = metrics.base_rate(_target(ctx), ctx.unprivileged)
        stats["num_privileged"] = int(ctx.privileged.mask(ds).sum())
        stats["num_unprivileged"] = int(ctx.unprivileged.mask(ds).sum())
    elif metric_id in ("average_odds_difference", "equal_opportunity_difference"):
        for name, spec in (("privileged", ctx.privileged), ("unprivileged", ctx.unprivileged)):
            counts = metrics.confusion_counts(ds, ctx.predicted, spec)
            stats[f"tpr_{name}"] = metrics.rate(counts, "tpr")
            if metric_id == "average_odds_difference":
                stats[f"fpr_{name}"] = metrics.rate(counts, "fpr")
    elif metric_id == "consistency":
        stats["k"] = params.get("k", 5)
    elif metric_id in ("generalized_entropy_index", "theil_index"):
        if metric_id == "generalized_entropy_index":
            stats["alpha"] = params.get("alpha", 2.0)
        b = ctx.predicted.binary_labels() - ds.binary_labels() + 1.0
        w = ds.instance_weights
        stats["mean_benefit"] = float((w * b).sum() / w.sum())
    elif metric_id == "base_rate":
        mask = group.mask(ds) if group is not None else np.ones(ds.n_instances, bool)
        stats["total_weight"] = float(ds.instance_weights[mask].sum())
    stats["num_instances"] = _scope_count(ctx, scope)
    stats["value"] = value
    return stats


def _target(ctx: MetricContext) -> StructuredDataset:
    return ctx.predicted if ctx.predicted is not None else ctx.dataset


def _scope_count(ctx: MetricContext, scope: str) -> int:
    group = _scope_group(ctx, scope)
    if group is None:
        return ctx.dataset.n_instances
    return int(group.mask(ctx.dataset).sum())


def _compute(metric_id: str, ctx: MetricContext, scope: str, params: dict):
    scoped = dict(params)
    if metric_id in ("base_rate", "accuracy", "balanced_accuracy"):
        scoped["group"] = _scope_group(ctx, scope)
    return ctx.value(metric_id, **scoped)


def explain_text(metric_id: str, ctx: MetricContext, scope: str = "all", **params) -> str:
    """One sentence embedding the scoped instance count and the metric value.

    An undefined metric yields a sentence stating why rather than raising.
    """
    if metric_id not in METRIC_INFO:
        metrics.evaluate(metric_id, ctx.dataset)  # raises the catalog error
    title = _TITLES[metric_id].format(
        k=params.get("k", 5), alpha=format_number(params.get("alpha", 2.0))
    )
    count = _scope_count(ctx, scope)
    try:
        value = _compute(metric_id, ctx, scope, params)
    except UndefinedMetricError as exc:
        return f"{title} is undefined: {exc}"
    return f"{title} on {count} {_scope_phrase(scope)}: {format_number(value)}"


def explain_json(
    metric_id: str, ctx: MetricContext, scope: str = "all", **params
) -> ExplanationRecord:
    """Structured explanation; stats.value is the metric value, bit for bit."""
    if metric_id not in METRIC_INFO:
        metrics.evaluate(metric_id, ctx.dataset)
    info = METRIC_INFO[metric_id]
    meta = {
        "name": metric_id,
        "definition": info.definition,
        "ideal": info.ideal,
    }
    text = explain_text(metric_id, ctx, scope=scope, **params)
    try:
        value = _compute(metric_id, ctx, scope, params)
        stats = _stats_for(metric_id, ctx, scope, value, params)
    except UndefinedMetricError as exc:
        stats = {"value": None, "undefined_reason": str(exc)}
    return ExplanationRecord(meta=meta, stats=stats, text=text)


# -- localization -------------------------------------------------------------


@dataclass
class BiasSegment:
    """One slice of the population with its local metric value and flag."""

    dimension: str
    value: float | None
    reference: float
    weight: float
    count: int
    flag: str  # localized | not-localized | undefined
    category: str | None = None
    lower: float | None = None
    upper: float | None = None
    direction: str | None = None  # diminished | enhanced
    severity: float = field(default=0.0)

    def label(self) -> str:
        if self.category is not None:
            return self.category
        return f"[{format_number(self.lower)}, {format_number(self.upper)}]"

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "segment": self.label(),
            "category": self.category,
            "lower": self.lower,
            "upper": self.upper,
            "value": self.value,
            "reference": self.reference,
            "weight": self.weight,
            "count": self.count,
            "flag": self.flag,
            "direction": self.direction,
            "severity": self.severity,
        }


def _single_dataset_metric(metric_id: str) -> None:
    info = METRIC_INFO.get(metric_id)
    if info is None:
        raise ArgumentError(f"unknown metric {metric_id!r}")
    if info.kind == "classification" or metric_id in (
        "statistical_parity_difference",
        "disparate_impact",
    ):
        raise ArgumentError(
            f"{metric_id} is not a one-dataset metric; localization over a "
            "protected attribute needs a group-free measure such as base_rate"
        )


def _numeric_bins(values: np.ndarray, bins: int) -> list[np.ndarray]:
    """Equal-frequency bin masks partitioning the rows; empty bins dropped."""
    edges = np.quantile(values, np.linspace(0.0, 1.0, bins + 1))
    inner = np.unique(edges[1:-1])
    idx = np.searchsorted(inner, values, side="right")
    return [idx == b for b in range(len(inner) + 1) if (idx == b).any()]


def localize_protected(
    ds: StructuredDataset,
    metric_id: str = "base_rate",
    attribute: str | None = None,
    bins: int = 10,
    tau: float = 0.25,
    tau_mode: str = "relative",
    **params,
) -> list[BiasSegment]:
    """Per-bin metric values over an attribute's raw (pre-binarized) values.

    Numeric attributes are split into equal-frequency bins, categorical ones
    into one segment per value. A segment is flagged ``localized`` when its
    metric deviates from the whole-dataset value by more than tau (relative
    to that value by default, absolute with tau_mode="absolute"), with the
    direction recorded as diminished or enhanced.
    """
    _single_dataset_metric(metric_id)
    if tau_mode not in ("relative", "absolute"):
        raise ArgumentError(f"unknown tau_mode {tau_mode!r}")
    if attribute is None:
        if len(ds.protected_attribute_names) != 1:
            raise ArgumentError("attribute required when several are protected")
        attribute = ds.protected_attribute_names[0]
    if attribute not in ds.protected_attribute_names:
        raise ArgumentError(f"{attribute!r} is not a protected attribute of this dataset")
    raw = ds.metadata.get("protected_attribute_raw", {}).get(attribute)
    if raw is None:
        raise CapabilityError(
            f"raw values for {attribute!r} were not retained; load the data "
            "through load_standard to keep pre-binarized values"
        )
    raw = np.asarray(raw)
    reference = metrics.evaluate(metric_id, ds, **params)
    scale = max(abs(reference), 1e-12) if tau_mode == "relative" else 1.0

    numeric = np.issubdtype(raw.dtype, np.number)
    if numeric:
        masks = _numeric_bins(raw.astype(float), bins)
        labels = [None] * len(masks)
    else:
        cats = sorted(np.unique(raw.astype(str)))
        masks = [raw.astype(str) == c for c in cats]
        labels = cats

    segments = []
    for mask, cat in zip(masks, labels):
        sub = ds.subset(mask, transform="localize_bin")
        value = metrics.evaluate(metric_id, sub, **params)
        deviation = value - reference
        flagged = abs(deviation) > tau * scale
        segments.append(
            BiasSegment(
                dimension=attribute,
                category=cat,
                lower=float(raw[mask].astype(float).min()) if numeric else None,
                upper=float(raw[mask].astype(float).max()) if numeric else None,
                value=value,
                reference=reference,
                weight=float(ds.instance_weights[mask].sum()),
                count=int(mask.sum()),
                flag="localized" if flagged else "not-localized",
                direction=("diminished" if deviation < 0 else "enhanced") if flagged else None,
                severity=abs(deviation),
            )
        )
    return segments


def localize_feature(
    ctx: MetricContext,
    metric_id: str,
    feature: str,
    tau: float = 0.25,
    tau_mode: str = "relative",
    **params,
) -> list[BiasSegment]:
    """Per-category metric values for one feature, ranked by severity.

    Severity is distance from the metric's ideal value (or from the overall
    value when no ideal exists). Categories whose severity exceeds the
    overall severity by more than tau are flagged. Categories on which the
    metric is undefined (an empty group) are appended unranked with flag
    ``undefined``.
    """
    if tau_mode not in ("relative", "absolute"):
        raise ArgumentError(f"unknown tau_mode {tau_mode!r}")
    ds = ctx.dataset
    raw_map = ds.metadata.get("raw_feature_values", {})
    if feature in raw_map:
        column = np.asarray(raw_map[feature]).astype(str)
    elif feature in ds.feature_names:
        column = ds.features[:, ds.feature_names.index(feature)].astype(str)
    else:
        raise ArgumentError(f"unknown feature {feature!r}")

    info = METRIC_INFO.get(metric_id)
    if info is None:
        raise ArgumentError(f"unknown metric {metric_id!r}")
    overall = ctx.value(metric_id, **params)
    ideal = info.ideal

    def severity(v: float) -> float:
        anchor = ideal if ideal is not None else overall
        return abs(v - anchor)

    base_sev = severity(overall)
    scale = max(base_sev, 1e-12) if tau_mode == "relative" else 1.0

    ranked, undefined = [], []
    for cat in sorted(np.unique(column)):
        mask = column == cat
        sub = ds.subset(mask, transform="localize_category")
        sub_pred = (
            ctx.predicted.subset(mask, transform="localize_category")
            if ctx.predicted is not None
            else None
        )
        common = dict(
            dimension=feature,
            category=str(cat),
            reference=overall,
            weight=float(ds.instance_weights[mask].sum()),
            count=int(mask.sum()),
        )
        try:
            value = metrics.evaluate(
                metric_id,
                sub,
                predicted=sub_pred,
                privileged=ctx.privileged,
                unprivileged=ctx.unprivileged,
                **params,
            )
        except UndefinedMetricError:
            undefined.append(BiasSegment(value=None, flag="undefined", **common))
            continue
        sev = severity(value)
        flagged = (sev - base_sev) > tau * scale
        ranked.append(
            BiasSegment(
                value=value,
                flag="localized" if flagged else "not-localized",
                severity=sev,
                **common,
            )
        )
    ranked.sort(key=lambda s: (-s.severity, s.category))
    return ranked + undefined
