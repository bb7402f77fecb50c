"""Repeated-split benchmark: fairness vs balanced accuracy, before and after.

Each repeat splits the data into train/validation/test, trains a logistic
baseline with a validation-tuned threshold, applies one mitigation algorithm
through its stage-appropriate path, and evaluates the configured metrics on
test predictions. Splits are seeded as master seed + index, so a config
reruns to identical bytes. Per-split failures (a class or group missing
from a small partition) are recorded and skipped rather than aborting the
run.

The module emits tables and plot-ready data; drawing figures is left to
callers.
"""

from __future__ import annotations

import hashlib
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import (
    GroupSpec,
    StandardDatasetSpec,
    StructuredDataset,
    load_preset,
    load_standard,
    preset_names,
)
from .errors import ArgumentError, CatalogError, FairlabError
from .metrics import METRIC_INFO, balanced_accuracy, evaluate, metric_ids
from .mitigate import ALGORITHMS, get_algorithm
from .model import TrainConfig, apply_threshold, fit_logistic, predict_scores, tune_threshold

__all__ = [
    "DEFAULT_METRICS",
    "ExperimentConfig",
    "PipelineResult",
    "RunResult",
    "SummaryTable",
    "emit_report",
    "run_experiment",
    "run_pipeline",
    "write_report_files",
]

DEFAULT_METRICS = (
    "statistical_parity_difference",
    "disparate_impact",
    "average_odds_difference",
    "equal_opportunity_difference",
    "theil_index",
)

REPORT_FORMATS = ("csv", "json", "plotdata")


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one benchmark run."""

    dataset: str | None = None
    data_file: str | None = None
    spec: str | None = None
    protected: str | None = None
    privileged: tuple | None = None
    unprivileged: tuple | None = None
    algorithm: str | None = None
    params: dict = field(default_factory=dict)
    metrics: tuple = DEFAULT_METRICS
    fractions: tuple = (0.5, 0.2, 0.3)
    repeats: int = 25
    seed: int = 0

    def __post_init__(self):
        if (self.dataset is None) == (self.data_file is None):
            raise ArgumentError("exactly one of dataset / data_file is required")
        if self.data_file is not None and self.spec is None:
            raise ArgumentError("data_file requires a spec file")
        if len(self.fractions) != 3 or any(f <= 0 for f in self.fractions):
            raise ArgumentError("fractions must be three positive numbers")
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise ArgumentError(f"fractions must sum to 1, got {sum(self.fractions)}")
        if self.repeats < 1:
            raise ArgumentError("repeats must be >= 1")
        if not self.metrics:
            raise ArgumentError("metric list must not be empty")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {
            "dataset",
            "data_file",
            "spec",
            "protected",
            "privileged",
            "unprivileged",
            "algorithm",
            "params",
            "metrics",
            "fractions",
            "repeats",
            "seed",
        }
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ArgumentError(f"unknown experiment config field(s): {unknown}")
        cleaned = dict(raw)
        for key in ("privileged", "unprivileged", "metrics", "fractions"):
            if key in cleaned and cleaned[key] is not None:
                cleaned[key] = tuple(cleaned[key])
        if "repeats" in cleaned:
            cleaned["repeats"] = int(cleaned["repeats"])
        if "seed" in cleaned:
            cleaned["seed"] = int(cleaned["seed"])
        return cls(**cleaned)

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "data_file": self.data_file,
            "spec": self.spec,
            "protected": self.protected,
            "privileged": None if self.privileged is None else list(self.privileged),
            "unprivileged": (
                None if self.unprivileged is None else list(self.unprivileged)
            ),
            "algorithm": self.algorithm,
            "params": self.params,
            "metrics": list(self.metrics),
            "fractions": list(self.fractions),
            "repeats": self.repeats,
            "seed": self.seed,
        }

    def digest(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return hashlib.blake2b(payload.encode(), digest_size=6).hexdigest()


@dataclass
class PipelineResult:
    """One split end to end; the service renders reports from this."""

    test: StructuredDataset
    pred_before: StructuredDataset
    pred_after: StructuredDataset | None
    threshold_before: float
    threshold_after: float | None
    metrics_before: dict
    metrics_after: dict | None
    balanced_accuracy_before: float
    balanced_accuracy_after: float | None
    algorithm_state: dict | None
    dataset_digest: str
    timings: dict


@dataclass
class RunResult:
    """Per-split record kept by the benchmark harness."""

    split: int
    seed: int
    threshold_before: float
    threshold_after: float | None
    metrics_before: dict
    metrics_after: dict | None
    balanced_accuracy_before: float
    balanced_accuracy_after: float | None
    timings: dict

    def to_dict(self) -> dict:
        # timings stay off the wire: emitted artifacts must be byte-stable
        return {
            "split": self.split,
            "seed": self.seed,
            "threshold_before": self.threshold_before,
            "threshold_after": self.threshold_after,
            "metrics_before": self.metrics_before,
            "metrics_after": self.metrics_after,
            "balanced_accuracy_before": self.balanced_accuracy_before,
            "balanced_accuracy_after": self.balanced_accuracy_after,
        }


def _metric_values(metric_names, truth, pred, privileged, unprivileged) -> dict:
    return {
        name: evaluate(
            name, truth, predicted=pred, privileged=privileged, unprivileged=unprivileged
        )
        for name in metric_names
    }


def run_pipeline(
    ds: StructuredDataset,
    privileged: GroupSpec,
    unprivileged: GroupSpec,
    metrics=DEFAULT_METRICS,
    algorithm: str | None = None,
    params: dict | None = None,
    fractions=(0.5, 0.2, 0.3),
    seed: int = 0,
    train_config: TrainConfig | None = None,
) -> PipelineResult:
    """Split, train, measure, and optionally mitigate and measure again.

    Pre-processors fit on train and never see validation or test labels;
    their feature maps are applied to the held-out partitions when they
    modify features. The in-processing path replaces the baseline learner.
    Post-processors fit on validation outputs and adjust test predictions,
    randomized ones seeded with the split seed.
    """
    start = time.perf_counter()
    cfg = train_config or TrainConfig()
    train, val, test = ds.split(fractions, shuffle=True, seed=seed)

    model = fit_logistic(train, cfg)
    scores_val = predict_scores(model, val)
    threshold = tune_threshold(scores_val, val)
    scores_test = predict_scores(model, test)
    pred_before = apply_threshold(scores_test, threshold)
    before = _metric_values(metrics, test, pred_before, privileged, unprivileged)
    bal_before = balanced_accuracy(test, pred_before)
    baseline_done = time.perf_counter()

    if algorithm is None:
        return PipelineResult(
            test=test,
            pred_before=pred_before,
            pred_after=None,
            threshold_before=threshold,
            threshold_after=None,
            metrics_before=before,
            metrics_after=None,
            balanced_accuracy_before=bal_before,
            balanced_accuracy_after=None,
            algorithm_state=None,
            dataset_digest=ds.content_digest(),
            timings={
                "baseline": baseline_done - start,
                "mitigation": None,
                "total": baseline_done - start,
            },
        )

    algo = get_algorithm(algorithm, privileged, unprivileged, **(params or {}))
    if algo.category == "pre":
        algo.fit(train)
        model_after = fit_logistic(algo.transform(train), cfg)
        if algo.modifies_features:
            val_after = algo.transform_features(val)
            test_after = algo.transform_features(test)
        else:
            val_after, test_after = val, test
        threshold_after = tune_threshold(predict_scores(model_after, val_after), val)
        pred_after = apply_threshold(
            predict_scores(model_after, test_after), threshold_after
        )
    elif algo.category == "in":
        algo.fit(train)
        threshold_after = tune_threshold(algo.predict_scores(val), val)
        pred_after = apply_threshold(algo.predict_scores(test), threshold_after)
    elif algorithm == "eq_odds":
        algo.fit(val, apply_threshold(scores_val, threshold))
        pred_after = algo.apply(pred_before, seed=seed)
        threshold_after = threshold
    elif algorithm == "calibrated_eq_odds":
        algo.fit(val, scores_val)
        pred_after = apply_threshold(algo.apply(scores_test, seed=seed), threshold)
        threshold_after = threshold
    else:  # reject_option
        algo.fit(val, scores_val)
        pred_after = algo.apply(scores_test)
        threshold_after = algo.threshold_

    after = _metric_values(metrics, test, pred_after, privileged, unprivileged)
    bal_after = balanced_accuracy(test, pred_after)
    done = time.perf_counter()
    return PipelineResult(
        test=test,
        pred_before=pred_before,
        pred_after=pred_after,
        threshold_before=threshold,
        threshold_after=threshold_after,
        metrics_before=before,
        metrics_after=after,
        balanced_accuracy_before=bal_before,
        balanced_accuracy_after=bal_after,
        algorithm_state=algo.state_dict(),
        dataset_digest=ds.content_digest(),
        timings={
            "baseline": baseline_done - start,
            "mitigation": done - baseline_done,
            "total": done - start,
        },
    )


def load_config_dataset(
    cfg: ExperimentConfig, data_dir=None
) -> StructuredDataset:
    """Resolve the config's dataset reference to a loaded dataset."""
    if cfg.dataset is not None:
        if cfg.dataset not in preset_names():
            raise CatalogError(
                f"unknown dataset {cfg.dataset!r}", valid=preset_names()
            )
        if data_dir is None:
            raise ArgumentError("a data directory is required for preset datasets")
        return load_preset(cfg.dataset, data_dir)
    spec = StandardDatasetSpec.from_json(cfg.spec)
    return load_standard(cfg.data_file, spec)


def resolve_groups(
    ds: StructuredDataset, cfg: ExperimentConfig
) -> tuple[GroupSpec, GroupSpec]:
    """Group specs from explicit value lists, or the dataset's defaults."""
    if cfg.protected is not None and cfg.protected not in ds.protected_attribute_names:
        raise CatalogError(
            f"unknown protected attribute {cfg.protected!r}",
            valid=list(ds.protected_attribute_names),
        )
    if cfg.privileged is not None or cfg.unprivileged is not None:
        if cfg.protected is None:
            raise ArgumentError("explicit group values require a protected attribute")
        if cfg.privileged is None or cfg.unprivileged is None:
            raise ArgumentError("privileged and unprivileged values come as a pair")
        priv = GroupSpec([{cfg.protected: float(v)} for v in cfg.privileged])
        unpriv = GroupSpec([{cfg.protected: float(v)} for v in cfg.unprivileged])
        return priv, unpriv
    return (
        ds.default_privileged_spec(cfg.protected),
        ds.default_unprivileged_spec(cfg.protected),
    )


@dataclass
class SummaryTable:
    """All per-split results of one experiment plus their aggregation."""

    config: ExperimentConfig
    runs: list
    failures: list

    def __post_init__(self):
        bad = [r for r in self.runs if not isinstance(r, RunResult)]
        if bad:
            raise ArgumentError("runs must be RunResult records")

    @property
    def has_after(self) -> bool:
        return self.config.algorithm is not None

    def aggregate(self) -> dict:
        """Mean and sample std (ddof=1; 0.0 for a single run) per metric and phase."""
        if not self.runs:
            raise ArgumentError("no successful splits to aggregate")

        def stats(values):
            arr = np.asarray(values, dtype=float)
            mean = float(arr.mean())
            std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
            return {"mean": mean, "std": std, "n": int(arr.size)}

        out = {}
        for name in self.config.metrics:
            entry = {"before": stats([r.metrics_before[name] for r in self.runs])}
            entry["after"] = (
                stats([r.metrics_after[name] for r in self.runs])
                if self.has_after
                else None
            )
            out[name] = entry
        entry = {"before": stats([r.balanced_accuracy_before for r in self.runs])}
        entry["after"] = (
            stats([r.balanced_accuracy_after for r in self.runs])
            if self.has_after
            else None
        )
        out["balanced_accuracy"] = entry
        return out


def run_experiment(
    cfg: ExperimentConfig,
    data_dir=None,
    dataset: StructuredDataset | None = None,
) -> SummaryTable:
    """Run cfg.repeats seeded splits; degenerate splits become failure records."""
    unknown_metrics = [m for m in cfg.metrics if m not in METRIC_INFO]
    if unknown_metrics:
        raise CatalogError(
            f"unknown metric(s) {unknown_metrics}", valid=metric_ids()
        )
    if cfg.algorithm is not None and cfg.algorithm not in ALGORITHMS:
        raise CatalogError(
            f"unknown mitigation algorithm {cfg.algorithm!r}",
            valid=list(ALGORITHMS),
        )
    ds = dataset if dataset is not None else load_config_dataset(cfg, data_dir)
    privileged, unprivileged = resolve_groups(ds, cfg)

    runs, failures = [], []
    for i in range(cfg.repeats):
        split_seed = cfg.seed + i
        try:
            result = run_pipeline(
                ds,
                privileged,
                unprivileged,
                metrics=cfg.metrics,
                algorithm=cfg.algorithm,
                params=cfg.params,
                fractions=cfg.fractions,
                seed=split_seed,
            )
        except FairlabError as exc:
            failures.append(
                {
                    "split": i,
                    "seed": split_seed,
                    "error": type(exc).__name__,
                    "message": str(exc),
                }
            )
            continue
        runs.append(
            RunResult(
                split=i,
                seed=split_seed,
                threshold_before=result.threshold_before,
                threshold_after=result.threshold_after,
                metrics_before=result.metrics_before,
                metrics_after=result.metrics_after,
                balanced_accuracy_before=result.balanced_accuracy_before,
                balanced_accuracy_after=result.balanced_accuracy_after,
                timings=result.timings,
            )
        )
    return SummaryTable(config=cfg, runs=runs, failures=failures)


def _csv_report(summary: SummaryTable) -> bytes:
    agg = summary.aggregate()
    buf = io.StringIO()
    buf.write("metric,phase,mean,std,n\n")
    names = list(summary.config.metrics) + ["balanced_accuracy"]
    for name in names:
        for phase in ("before", "after"):
            cell = agg[name][phase]
            if cell is None:
                continue
            buf.write(f"{name},{phase},{cell['mean']!r},{cell['std']!r},{cell['n']}\n")
    return buf.getvalue().encode()


def _json_report(summary: SummaryTable) -> bytes:
    doc = {
        "config": summary.config.to_dict(),
        "config_digest": summary.config.digest(),
        "aggregate": summary.aggregate(),
        "failures": summary.failures,
        "runs": [r.to_dict() for r in summary.runs],
    }
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode()


def _plotdata_report(summary: SummaryTable) -> bytes:
    summary.aggregate()  # reuses the nonempty check
    metrics_block = []
    for name in summary.config.metrics:
        points = []
        for r in summary.runs:
            point = {
                "split": r.split,
                "before": {
                    "value": r.metrics_before[name],
                    "balanced_accuracy": r.balanced_accuracy_before,
                },
            }
            point["after"] = (
                {
                    "value": r.metrics_after[name],
                    "balanced_accuracy": r.balanced_accuracy_after,
                }
                if summary.has_after
                else None
            )
            points.append(point)
        metrics_block.append(
            {
                "metric_id": name,
                "ideal": METRIC_INFO[name].ideal,
                "points": points,
            }
        )
    doc = {
        "config_digest": summary.config.digest(),
        "algorithm": summary.config.algorithm,
        "dataset": summary.config.dataset or summary.config.data_file,
        "metrics": metrics_block,
        "failures": len(summary.failures),
    }
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode()


def emit_report(summary: SummaryTable, format: str = "csv") -> bytes:
    """Render the summary as csv, json, or scatter-ready plotdata bytes."""
    if format == "csv":
        return _csv_report(summary)
    if format == "json":
        return _json_report(summary)
    if format == "plotdata":
        return _plotdata_report(summary)
    raise ArgumentError(f"unknown report format {format!r}; use one of {REPORT_FORMATS}")


def write_report_files(
    summary: SummaryTable, directory, formats=REPORT_FORMATS
) -> list[Path]:
    """Write one file per format, named by the config digest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    digest = summary.config.digest()
    suffix = {"csv": "csv", "json": "json", "plotdata": "plotdata.json"}
    paths = []
    for fmt in formats:
        payload = emit_report(summary, fmt)
        path = directory / f"bench_{digest}.{suffix.get(fmt, fmt)}"
        path.write_bytes(payload)
        paths.append(path)
    return paths
