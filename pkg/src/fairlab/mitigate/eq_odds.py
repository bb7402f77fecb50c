"""Post-hoc label mixing that equalizes group TPR and FPR.

Finds, per group, the probabilities of keeping a favorable prediction and of
flipping an unfavorable one so that post-mix true and false positive rates
match across groups while expected misclassification is minimal, after Hardt
et al. The two-equality linear program is solved exactly by enumerating
basic feasible solutions (two basic variables, the rest at a bound), which
is exhaustive at this size.

References:
    .. [1] M. Hardt, E. Price, and N. Srebro, "Equality of Opportunity in
       Supervised Learning," NeurIPS, 2016.
"""

from __future__ import annotations

import itertools

import numpy as np

from ..dataset import GroupSpec, StructuredDataset
from ..errors import InfeasibleError
from ..metrics import check_aligned, confusion_counts, rate
from .base import group_masks, require_fitted

__all__ = ["EqOddsPostprocessor"]

_GROUPS = ("privileged", "unprivileged")


class EqOddsPostprocessor:
    """Seeded label randomization with group-specific mixing probabilities.

    ``mix_[group]`` holds p(keep favorable | predicted favorable) and
    p(make favorable | predicted unfavorable). Rows outside both groups are
    returned unchanged; features and weights are never touched.
    """

    algorithm_id = "eq_odds"
    category = "post"
    modifies_features = False

    def __init__(self, privileged: GroupSpec, unprivileged: GroupSpec):
        self.privileged = privileged
        self.unprivileged = unprivileged
        self.mix_: dict[str, dict[str, float]] | None = None
        self.rates_: dict[str, dict[str, float]] | None = None
        self.objective_: float | None = None

    def fit(
        self, true_ds: StructuredDataset, pred_ds: StructuredDataset
    ) -> "EqOddsPostprocessor":
        check_aligned(true_ds, pred_ds)
        group_masks(true_ds, self.privileged, self.unprivileged)

        counts = {}
        for name, spec in zip(_GROUPS, (self.privileged, self.unprivileged)):
            counts[name] = confusion_counts(true_ds, pred_ds, spec)
        tpr_p = rate(counts["privileged"], "tpr")
        fpr_p = rate(counts["privileged"], "fpr")
        tpr_u = rate(counts["unprivileged"], "tpr")
        fpr_u = rate(counts["unprivileged"], "fpr")
        union = sum(c.total for c in counts.values())
        pi = {
            name: (c.positives / union, c.negatives / union)
            for name, c in counts.items()
        }

        # variables [fav_u, unf_u, fav_p, unf_p]: p(favorable | predicted f/u)
        eq = np.array(
            [
                [tpr_u, 1.0 - tpr_u, -tpr_p, -(1.0 - tpr_p)],
                [fpr_u, 1.0 - fpr_u, -fpr_p, -(1.0 - fpr_p)],
            ]
        )
        cost = np.array(
            [
                -pi["unprivileged"][0] * tpr_u + pi["unprivileged"][1] * fpr_u,
                -pi["unprivileged"][0] * (1.0 - tpr_u)
                + pi["unprivileged"][1] * (1.0 - fpr_u),
                -pi["privileged"][0] * tpr_p + pi["privileged"][1] * fpr_p,
                -pi["privileged"][0] * (1.0 - tpr_p)
                + pi["privileged"][1] * (1.0 - fpr_p),
            ]
        )
        const = pi["unprivileged"][0] + pi["privileged"][0]

        best = None
        best_val = np.inf
        for basic in itertools.combinations(range(4), 2):
            free = [i for i in range(4) if i not in basic]
            for bounds in itertools.product((0.0, 1.0), repeat=2):
                rhs = -(eq[:, free] @ np.asarray(bounds))
                try:
                    sol = np.linalg.solve(eq[:, basic], rhs)
                except np.linalg.LinAlgError:
                    continue
                point = np.empty(4)
                point[list(basic)] = sol
                point[free] = bounds
                if np.any(point < -1e-9) or np.any(point > 1.0 + 1e-9):
                    continue
                point = np.clip(point, 0.0, 1.0) + 0.0  # clears negative zero
                value = float(cost @ point) + const
                if value < best_val - 1e-12:
                    best, best_val = point, value
        if best is None:
            raise InfeasibleError(
                "no mixing probabilities equalize the odds; group rates are "
                f"degenerate (tpr={tpr_u:.4f}/{tpr_p:.4f}, "
                f"fpr={fpr_u:.4f}/{fpr_p:.4f})"
            )

        self.mix_ = {
            "unprivileged": {
                "given_favorable": float(best[0]),
                "given_unfavorable": float(best[1]),
            },
            "privileged": {
                "given_favorable": float(best[2]),
                "given_unfavorable": float(best[3]),
            },
        }
        self.rates_ = {
            "privileged": {"tpr": tpr_p, "fpr": fpr_p},
            "unprivileged": {"tpr": tpr_u, "fpr": fpr_u},
        }
        self.objective_ = best_val
        return self

    def apply(self, pred_ds: StructuredDataset, seed: int = 0) -> StructuredDataset:
        require_fitted(self.mix_, "EqOddsPostprocessor")
        pmask, umask = group_masks(pred_ds, self.privileged, self.unprivileged)
        fav = pred_ds.favorable_mask()
        draws = np.random.default_rng(seed).random(pred_ds.n_instances)
        new_fav = fav.copy()
        for name, gmask in (("privileged", pmask), ("unprivileged", umask)):
            mix = self.mix_[name]
            keep = draws < mix["given_favorable"]
            flip = draws < mix["given_unfavorable"]
            new_fav[gmask & fav] = keep[gmask & fav]
            new_fav[gmask & ~fav] = flip[gmask & ~fav]
        labels = np.where(
            new_fav, pred_ds.favorable_label, pred_ds.unfavorable_label
        )
        return pred_ds.derive(
            "eq_odds",
            {"mix": self.mix_, "seed": int(seed)},
            labels=labels,
        )

    def expected_rates(self) -> dict[str, dict[str, float]]:
        """Post-mix TPR/FPR per group implied by the fitted probabilities."""
        require_fitted(self.mix_, "EqOddsPostprocessor")
        out = {}
        for name in _GROUPS:
            mix, rates = self.mix_[name], self.rates_[name]
            out[name] = {
                "tpr": rates["tpr"] * mix["given_favorable"]
                + (1.0 - rates["tpr"]) * mix["given_unfavorable"],
                "fpr": rates["fpr"] * mix["given_favorable"]
                + (1.0 - rates["fpr"]) * mix["given_unfavorable"],
            }
        return out

    def state_dict(self) -> dict:
        require_fitted(self.mix_, "EqOddsPostprocessor")
        return {
            "version": 1,
            "algorithm": self.algorithm_id,
            "mix": self.mix_,
            "rates": self.rates_,
            "objective": self.objective_,
        }
