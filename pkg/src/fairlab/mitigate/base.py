"""Shared plumbing for the mitigation transformers."""

from __future__ import annotations

import numpy as np

from ..dataset import GroupSpec, StructuredDataset
from ..errors import ArgumentError

__all__ = ["group_masks", "require_fitted"]


def group_masks(
    ds: StructuredDataset, privileged: GroupSpec, unprivileged: GroupSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Validated disjoint group masks; empty groups are each caller's concern."""
    privileged.validate(ds)
    unprivileged.validate(ds)
    p = privileged.mask(ds)
    u = unprivileged.mask(ds)
    overlap = p & u
    if overlap.any():
        raise ArgumentError(
            f"privileged and unprivileged groups overlap on {int(overlap.sum())} "
            "instance(s)"
        )
    return p, u


def require_fitted(state, what: str) -> None:
    if state is None:
        raise ArgumentError(f"{what} must be fitted before use")
