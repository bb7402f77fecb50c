"""Instance reweighing that removes the group/label association.

Assigns each (group, label) cell the weight that makes group membership and
label statistically independent under the new weighting, following Kamiran &
Calders. Features and labels are untouched, so the weighted statistical
parity difference of the transformed data is exactly zero.

References:
    .. [1] F. Kamiran and T. Calders, "Data Preprocessing Techniques for
       Classification without Discrimination," Knowledge and Information
       Systems, 2012.
"""

from __future__ import annotations

import numpy as np

from ..dataset import GroupSpec, StructuredDataset
from ..errors import DegenerateDataError
from .base import group_masks, require_fitted

__all__ = ["Reweighing"]


class Reweighing:
    """Per-(group, label) weight multipliers fit on training data.

    Rows outside both groups keep their original weights. The four cell
    weights are w(g, l) = W_g * W_l / (W * W_{g,l}) computed from the current
    instance weights over the union of the two groups.
    """

    algorithm_id = "reweighing"
    category = "pre"
    modifies_features = False

    def __init__(self, privileged: GroupSpec, unprivileged: GroupSpec):
        self.privileged = privileged
        self.unprivileged = unprivileged
        self.weights_: dict[tuple[str, str], float] | None = None

    def fit(self, ds: StructuredDataset) -> "Reweighing":
        priv, unpriv = group_masks(ds, self.privileged, self.unprivileged)
        fav = ds.favorable_mask()
        w = ds.instance_weights
        union = priv | unpriv
        total = float(w[union].sum())
        table = {}
        for gname, gmask in (("privileged", priv), ("unprivileged", unpriv)):
            for lname, lmask in (("favorable", fav), ("unfavorable", ~fav)):
                cell = float(w[gmask & lmask].sum())
                if cell <= 0.0:
                    raise DegenerateDataError(
                        f"({gname}, {lname}) cell carries no weight; reweighing "
                        "needs all four group/label cells populated"
                    )
                expected = float(w[gmask].sum()) * float(w[union & lmask].sum()) / total
                table[(gname, lname)] = expected / cell
        self.weights_ = table
        return self

    def transform(self, ds: StructuredDataset) -> StructuredDataset:
        require_fitted(self.weights_, "Reweighing")
        priv, unpriv = group_masks(ds, self.privileged, self.unprivileged)
        fav = ds.favorable_mask()
        multiplier = np.ones(ds.n_instances)
        for gname, gmask in (("privileged", priv), ("unprivileged", unpriv)):
            for lname, lmask in (("favorable", fav), ("unfavorable", ~fav)):
                multiplier[gmask & lmask] = self.weights_[(gname, lname)]
        return ds.derive(
            "reweighing",
            {"weights": {f"{g}/{l}": v for (g, l), v in self.weights_.items()}},
            instance_weights=ds.instance_weights * multiplier,
        )

    def fit_transform(self, ds: StructuredDataset) -> StructuredDataset:
        return self.fit(ds).transform(ds)

    def state_dict(self) -> dict:
        require_fitted(self.weights_, "Reweighing")
        return {
            "version": 1,
            "algorithm": self.algorithm_id,
            "weights": {f"{g}/{l}": v for (g, l), v in self.weights_.items()},
        }
