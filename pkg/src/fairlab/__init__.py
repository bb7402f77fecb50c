"""Fairness toolkit for tabular binary classification.

Measure group and individual bias on datasets and model predictions,
explain each number, mitigate with pre-, in-, and post-processing
algorithms, benchmark them across seeded splits, and serve bias reports
over HTTP. Heavy optional layers (matplotlib figures, the FastAPI app)
live in ``fairlab.plots`` and ``fairlab.service`` and are not imported
here.
"""

from .bench import (
    DEFAULT_METRICS,
    ExperimentConfig,
    PipelineResult,
    RunResult,
    SummaryTable,
    emit_report,
    run_experiment,
    run_pipeline,
    write_report_files,
)
from .dataset import (
    GroupSpec,
    Provenance,
    StandardDatasetSpec,
    StructuredDataset,
    dataset_equal,
    load_preset,
    load_standard,
    preset_names,
    preset_spec,
)
from .errors import (
    AlignmentError,
    ArgumentError,
    CapabilityError,
    CatalogError,
    DegenerateDataError,
    EmptyDatasetError,
    FairlabError,
    InfeasibleError,
    NumericalError,
    ParseError,
    SchemaError,
    UndefinedMetricError,
)
from .explain import (
    BiasSegment,
    ExplanationRecord,
    explain_json,
    explain_text,
    format_number,
    localize_feature,
    localize_protected,
)
from .metrics import (
    METRIC_INFO,
    MetricContext,
    average_odds_difference,
    balanced_accuracy,
    base_rate,
    consistency,
    disparate_impact,
    equal_opportunity_difference,
    evaluate,
    generalized_entropy_index,
    metric_ids,
    sample_distortion,
    statistical_parity_difference,
    theil_index,
)
from .mitigate import (
    ALGORITHMS,
    CalibratedEqOdds,
    DisparateImpactRemover,
    EqOddsPostprocessor,
    LFR,
    PrejudiceRemover,
    Reweighing,
    RejectOptionClassifier,
    algorithm_ids,
    get_algorithm,
)
from .model import (
    LogisticModel,
    ScoredPredictions,
    TrainConfig,
    apply_threshold,
    fit_logistic,
    predict_scores,
    tune_threshold,
)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "AlignmentError",
    "ArgumentError",
    "BiasSegment",
    "CalibratedEqOdds",
    "CapabilityError",
    "CatalogError",
    "DEFAULT_METRICS",
    "DegenerateDataError",
    "DisparateImpactRemover",
    "EmptyDatasetError",
    "EqOddsPostprocessor",
    "ExperimentConfig",
    "ExplanationRecord",
    "FairlabError",
    "GroupSpec",
    "InfeasibleError",
    "LFR",
    "LogisticModel",
    "METRIC_INFO",
    "MetricContext",
    "NumericalError",
    "ParseError",
    "PipelineResult",
    "PrejudiceRemover",
    "Provenance",
    "RejectOptionClassifier",
    "Reweighing",
    "RunResult",
    "SchemaError",
    "ScoredPredictions",
    "StandardDatasetSpec",
    "StructuredDataset",
    "SummaryTable",
    "TrainConfig",
    "UndefinedMetricError",
    "algorithm_ids",
    "apply_threshold",
    "average_odds_difference",
    "balanced_accuracy",
    "base_rate",
    "consistency",
    "dataset_equal",
    "disparate_impact",
    "emit_report",
    "equal_opportunity_difference",
    "evaluate",
    "explain_json",
    "explain_text",
    "fit_logistic",
    "format_number",
    "generalized_entropy_index",
    "get_algorithm",
    "load_preset",
    "load_standard",
    "localize_feature",
    "localize_protected",
    "metric_ids",
    "predict_scores",
    "preset_names",
    "preset_spec",
    "run_experiment",
    "run_pipeline",
    "sample_distortion",
    "statistical_parity_difference",
    "theil_index",
    "tune_threshold",
    "write_report_files",
]
