"""Bias mitigation algorithms under a shared fit/transform/predict contract.

Three stages are covered: pre-processing rewrites the training data,
in-processing trains a fairness-aware model, post-processing adjusts
predictions. Every algorithm takes the privileged and unprivileged group
specs first, exposes ``algorithm_id``/``category``/``modifies_features``
class attributes, and serializes its fitted state with ``state_dict``.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ArgumentError, CatalogError
from .cal_eq_odds import CalibratedEqOdds
from .di_remover import DisparateImpactRemover
from .eq_odds import EqOddsPostprocessor
from .lfr import LFR
from .prejudice import PrejudiceRemover
from .reject_option import RejectOptionClassifier
from .reweighing import Reweighing

__all__ = [
    "ALGORITHMS",
    "AlgorithmInfo",
    "CalibratedEqOdds",
    "DisparateImpactRemover",
    "EqOddsPostprocessor",
    "LFR",
    "PrejudiceRemover",
    "RejectOptionClassifier",
    "Reweighing",
    "algorithm_ids",
    "get_algorithm",
]


@dataclass(frozen=True)
class AlgorithmInfo:
    """Catalog entry describing one mitigation algorithm."""

    algorithm_id: str
    category: str  # pre | in | post
    cls: type
    summary: str


ALGORITHMS: dict[str, AlgorithmInfo] = {
    info.algorithm_id: info
    for info in (
        AlgorithmInfo(
            "reweighing",
            "pre",
            Reweighing,
            "Reweights (group, label) cells so labels are independent of the group.",
        ),
        AlgorithmInfo(
            "disparate_impact_remover",
            "pre",
            DisparateImpactRemover,
            "Aligns per-group feature distributions through quantile repair.",
        ),
        AlgorithmInfo(
            "lfr",
            "pre",
            LFR,
            "Learns prototype representations that hide group membership.",
        ),
        AlgorithmInfo(
            "prejudice_remover",
            "in",
            PrejudiceRemover,
            "Logistic model penalized by score/group mutual information.",
        ),
        AlgorithmInfo(
            "eq_odds",
            "post",
            EqOddsPostprocessor,
            "Randomized label mixing that equalizes group TPR and FPR.",
        ),
        AlgorithmInfo(
            "calibrated_eq_odds",
            "post",
            CalibratedEqOdds,
            "Mixes scores toward the base rate to equalize calibrated costs.",
        ),
        AlgorithmInfo(
            "reject_option",
            "post",
            RejectOptionClassifier,
            "Relabels a confidence band around the threshold by group.",
        ),
    )
}


def algorithm_ids() -> list[str]:
    return list(ALGORITHMS)


def get_algorithm(algorithm_id: str, privileged, unprivileged, **params):
    """Instantiate a mitigation algorithm by its catalog id."""
    try:
        info = ALGORITHMS[algorithm_id]
    except KeyError:
        raise CatalogError(
            f"unknown mitigation algorithm {algorithm_id!r}",
            valid=algorithm_ids(),
        ) from None
    try:
        return info.cls(privileged, unprivileged, **params)
    except TypeError as exc:
        raise ArgumentError(f"bad parameters for {algorithm_id}: {exc}") from None
