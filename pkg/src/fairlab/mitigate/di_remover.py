"""Feature repair that aligns per-group value distributions.

Each repaired feature is mapped through its group's empirical CDF onto the
pointwise median of the group quantile functions, then blended with the
original at a repair level lambda, after Feldman et al. Rank order within
each group is preserved because the map is non-decreasing.

References:
    .. [1] M. Feldman, S. A. Friedler, J. Moeller, C. Scheidegger, and
       S. Venkatasubramanian, "Certifying and Removing Disparate Impact,"
       ACM SIGKDD, 2015.
"""

from __future__ import annotations

import numpy as np

from ..dataset import GroupSpec, StructuredDataset
from ..errors import ArgumentError, DegenerateDataError
from .base import group_masks, require_fitted

__all__ = ["DisparateImpactRemover"]


def _cdf_points(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unique sorted values with their mean empirical ranks (rank/(n-1))."""
    order = np.sort(values)
    n = order.shape[0]
    ranks = np.arange(n, dtype=float) / (n - 1) if n > 1 else np.zeros(1)
    uniq, start, counts = np.unique(order, return_index=True, return_counts=True)
    # ties share the mean of their positional ranks
    mean_ranks = np.array(
        [ranks[s : s + c].mean() for s, c in zip(start, counts)]
    )
    return uniq, mean_ranks


class DisparateImpactRemover:
    """Quantile-transport repair of selected features toward a median distribution.

    Instance weights are not consulted; the empirical CDFs are over rows.
    Rows outside both groups pass through unchanged. By default every feature
    is repaired except columns that carry a protected attribute's name.
    """

    algorithm_id = "disparate_impact_remover"
    category = "pre"
    modifies_features = True

    def __init__(
        self,
        privileged: GroupSpec,
        unprivileged: GroupSpec,
        features: list[str] | None = None,
        repair_level: float = 1.0,
    ):
        _check_level(repair_level)
        self.privileged = privileged
        self.unprivileged = unprivileged
        self.features = list(features) if features is not None else None
        self.repair_level = float(repair_level)
        self.maps_: dict | None = None

    def fit(self, ds: StructuredDataset) -> "DisparateImpactRemover":
        priv, unpriv = group_masks(ds, self.privileged, self.unprivileged)
        if self.features is None:
            skip = set(ds.protected_attribute_names)
            names = [f for f in ds.feature_names if f not in skip]
        else:
            unknown = [f for f in self.features if f not in ds.feature_names]
            if unknown:
                raise ArgumentError(f"unknown feature(s) to repair: {unknown}")
            names = list(self.features)
        if not names:
            raise ArgumentError("no features left to repair")

        maps = {}
        for name in names:
            col = ds.features[:, ds.feature_names.index(name)]
            per_group = {}
            for gname, gmask in (("privileged", priv), ("unprivileged", unpriv)):
                if int(gmask.sum()) < 2:
                    raise DegenerateDataError(
                        f"{gname} group has fewer than 2 rows; cannot build a "
                        f"quantile map for feature {name!r}"
                    )
                uniq, ranks = _cdf_points(col[gmask])
                per_group[gname] = (uniq, ranks)
            maps[name] = per_group
        self.maps_ = maps
        return self

    @staticmethod
    def _median_quantile(per_group: dict, q: np.ndarray) -> np.ndarray:
        """Pointwise median across the group quantile functions at ranks q."""
        return np.median(
            np.stack([np.interp(q, ranks, uniq) for uniq, ranks in per_group.values()]),
            axis=0,
        )

    def _repaired_features(self, ds: StructuredDataset, level: float) -> np.ndarray:
        priv, unpriv = group_masks(ds, self.privileged, self.unprivileged)
        features = np.array(ds.features, dtype=float)
        for name, per_group in self.maps_.items():
            if name not in ds.feature_names:
                raise ArgumentError(f"dataset lacks repaired feature {name!r}")
            j = ds.feature_names.index(name)
            col = features[:, j]
            for gname, gmask in (("privileged", priv), ("unprivileged", unpriv)):
                if not gmask.any():
                    continue
                uniq, ranks = per_group[gname]
                q = np.interp(col[gmask], uniq, ranks)
                col[gmask] = (1.0 - level) * col[gmask] + level * self._median_quantile(
                    per_group, q
                )
            features[:, j] = col
        return features

    def transform(
        self, ds: StructuredDataset, repair_level: float | None = None
    ) -> StructuredDataset:
        require_fitted(self.maps_, "DisparateImpactRemover")
        level = self.repair_level if repair_level is None else float(repair_level)
        _check_level(level)
        return ds.derive(
            "disparate_impact_remover",
            {"repair_level": level, "features": sorted(self.maps_)},
            features=self._repaired_features(ds, level),
        )

    # feature-only application is the whole transform; labels never change
    transform_features = transform

    def fit_transform(
        self, ds: StructuredDataset, repair_level: float | None = None
    ) -> StructuredDataset:
        return self.fit(ds).transform(ds, repair_level)

    def state_dict(self) -> dict:
        require_fitted(self.maps_, "DisparateImpactRemover")
        return {
            "version": 1,
            "algorithm": self.algorithm_id,
            "repair_level": self.repair_level,
            "features": {
                name: {
                    g: {"values": u.tolist(), "ranks": r.tolist()}
                    for g, (u, r) in per_group.items()
                }
                for name, per_group in self.maps_.items()
            },
        }


def _check_level(level: float) -> None:
    if not 0.0 <= float(level) <= 1.0:
        raise ArgumentError(f"repair level must lie in [0, 1], got {level}")
