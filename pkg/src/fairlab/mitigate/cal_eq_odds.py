"""Score post-processing that equalizes calibrated group costs.

Keeps scores calibrated by mixing the lower-cost group toward its trivial
base-rate predictor instead of flipping labels, after Pleiss et al. The cost
is a generalized rate computed from scores: gfpr is the weighted mean score
over true negatives, gfnr the weighted mean of (1 - score) over true
positives, and "weighted" averages the two with equal weight. The mixing
rate alpha makes the expected post-mix costs equal when the formula is not
clipped at 1.

References:
    .. [1] G. Pleiss, M. Raghavan, F. Wu, J. Kleinberg, and K. Q.
       Weinberger, "On Fairness and Calibration," NeurIPS, 2017.
"""

from __future__ import annotations

import numpy as np

from ..dataset import GroupSpec, StructuredDataset
from ..errors import ArgumentError, DegenerateDataError
from ..metrics import check_aligned
from ..model import ScoredPredictions
from .base import group_masks, require_fitted

__all__ = ["CalibratedEqOdds"]

_COSTS = ("gfpr", "gfnr", "weighted")
_GROUPS = ("privileged", "unprivileged")


class CalibratedEqOdds:
    """Mixes one group's scores toward its base rate to equalize a chosen cost.

    After fitting, ``alpha_[group]`` is the probability with which that
    group's scores are replaced by the group base rate; only the lower-cost
    group gets a positive rate. Equal costs leave both alphas at zero.
    """

    algorithm_id = "calibrated_eq_odds"
    category = "post"
    modifies_features = False

    def __init__(
        self,
        privileged: GroupSpec,
        unprivileged: GroupSpec,
        cost: str = "weighted",
    ):
        if cost not in _COSTS:
            raise ArgumentError(f"cost must be one of {_COSTS}, got {cost!r}")
        self.privileged = privileged
        self.unprivileged = unprivileged
        self.cost = cost
        self.alpha_: dict[str, float] | None = None
        self.base_rates_: dict[str, float] | None = None
        self.costs_: dict[str, float] | None = None

    def _group_cost(self, scores, y, w, mask, name) -> tuple[float, float, float]:
        """(cost, trivial-predictor cost, base rate) for one group."""
        gw = w[mask]
        gy = y[mask]
        gs = scores[mask]
        total = float(gw.sum())
        if total <= 0.0:
            raise DegenerateDataError(f"{name} group carries no weight")
        base = float(gw[gy == 1.0].sum() / total)

        pos = gy == 1.0
        wpos = float(gw[pos].sum())
        wneg = total - wpos
        if self.cost in ("gfnr", "weighted") and wpos == 0.0:
            raise DegenerateDataError(
                f"{name} group has no positives; {self.cost} cost undefined"
            )
        if self.cost in ("gfpr", "weighted") and wneg == 0.0:
            raise DegenerateDataError(
                f"{name} group has no negatives; {self.cost} cost undefined"
            )
        gfnr = float((gw[pos] * (1.0 - gs[pos])).sum() / wpos) if wpos else 0.0
        gfpr = float((gw[~pos] * gs[~pos]).sum() / wneg) if wneg else 0.0
        if self.cost == "gfnr":
            return gfnr, 1.0 - base, base
        if self.cost == "gfpr":
            return gfpr, base, base
        return 0.5 * (gfpr + gfnr), 0.5, base

    def fit(
        self, true_ds: StructuredDataset, scored: ScoredPredictions
    ) -> "CalibratedEqOdds":
        check_aligned(true_ds, scored.dataset)
        pmask, umask = group_masks(true_ds, self.privileged, self.unprivileged)
        y = true_ds.binary_labels()
        w = true_ds.instance_weights

        cost, trivial, base = {}, {}, {}
        for name, mask in zip(_GROUPS, (pmask, umask)):
            cost[name], trivial[name], base[name] = self._group_cost(
                scored.scores, y, w, mask, name
            )

        low, high = sorted(_GROUPS, key=lambda g: cost[g])
        alpha = {g: 0.0 for g in _GROUPS}
        if cost[high] > cost[low]:
            gap = trivial[low] - cost[low]
            if gap == 0.0:
                raise DegenerateDataError(
                    f"{low} group cost equals its trivial-predictor cost "
                    f"({cost[low]:.6f}); mixing rate is undefined"
                )
            alpha[low] = float(np.clip((cost[high] - cost[low]) / gap, 0.0, 1.0))

        self.alpha_ = alpha
        self.base_rates_ = base
        self.costs_ = dict(cost)
        return self

    def apply(self, scored: ScoredPredictions, seed: int = 0) -> ScoredPredictions:
        require_fitted(self.alpha_, "CalibratedEqOdds")
        ds = scored.dataset
        pmask, umask = group_masks(ds, self.privileged, self.unprivileged)
        draws = np.random.default_rng(seed).random(ds.n_instances)
        scores = np.array(scored.scores)
        for name, mask in zip(_GROUPS, (pmask, umask)):
            chosen = mask & (draws < self.alpha_[name])
            scores[chosen] = self.base_rates_[name]
        return scored.replace_scores(scores, note=f"calibrated_eq_odds:{seed}")

    def expected_costs(self) -> dict[str, float]:
        """Post-mix group costs implied by alpha; equal when alpha was not clipped."""
        require_fitted(self.alpha_, "CalibratedEqOdds")
        out = {}
        for name in _GROUPS:
            a = self.alpha_[name]
            base = self.base_rates_[name]
            trivial = {"gfnr": 1.0 - base, "gfpr": base, "weighted": 0.5}[self.cost]
            out[name] = (1.0 - a) * self.costs_[name] + a * trivial
        return out

    def state_dict(self) -> dict:
        require_fitted(self.alpha_, "CalibratedEqOdds")
        return {
            "version": 1,
            "algorithm": self.algorithm_id,
            "cost": self.cost,
            "alpha": self.alpha_,
            "base_rates": self.base_rates_,
            "costs": self.costs_,
        }
