"""Immutable tabular dataset model with standardized loading and splitting.

A :class:`StructuredDataset` holds a dense feature matrix, binary labels,
protected attributes, and per-instance weights, all row-aligned. Instances
are immutable after construction: every transformation produces a new object
carrying a provenance record that points back to its parent.
"""

from __future__ import annotations

import copy
import datetime
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
import pandas as pd

from .errors import (
    ArgumentError,
    CapabilityError,
    EmptyDatasetError,
    ParseError,
    SchemaError,
)

__all__ = [
    "Provenance",
    "GroupSpec",
    "ProtectedSpec",
    "StandardDatasetSpec",
    "StructuredDataset",
    "dataset_equal",
    "group_mask",
    "load_standard",
    "preset_spec",
    "preset_names",
    "COMPARABLE_FIELDS",
]


def _digest(*parts: bytes) -> str:
    h = hashlib.blake2b(digest_size=16)
    for part in parts:
        h.update(part)
    return h.hexdigest()


def _params_digest(params: dict | None) -> str:
    return _digest(json.dumps(params or {}, sort_keys=True, default=str).encode())


@dataclass
class Provenance:
    """One link in a dataset's transformation history.

    The root record (a fresh load or direct construction) has no parent.
    Timestamps are informational only; they never enter digests or equality.
    """

    transform: str
    params_digest: str = _params_digest(None)
    created_at: str = ""
    parent: "Provenance | None" = None

    def __post_init__(self):
        if not self.created_at:
            self.created_at = datetime.datetime.now(datetime.timezone.utc).isoformat()

    def chain(self) -> list["Provenance"]:
        """All records from this one back to the root, newest first."""
        out, node, seen = [], self, set()
        while node is not None:
            if id(node) in seen:
                raise ArgumentError("provenance chain contains a cycle")
            seen.add(id(node))
            out.append(node)
            node = node.parent
        return out

    @property
    def depth(self) -> int:
        return len(self.chain()) - 1


@dataclass(frozen=True)
class GroupSpec:
    """Disjunction of attribute=value clauses selecting a population group.

    ``clauses`` is a sequence of mappings from protected attribute name to
    value; a row matches the spec when it satisfies every pair of at least
    one clause (OR over clauses, AND within a clause).
    """

    clauses: tuple

    def __init__(self, clauses: Iterable[dict]):
        clauses = tuple(dict(c) for c in clauses)
        if not clauses or any(not c for c in clauses):
            raise ArgumentError("group spec needs at least one nonempty clause")
        object.__setattr__(self, "clauses", clauses)

    def validate(self, ds: "StructuredDataset") -> None:
        known = set(ds.protected_attribute_names)
        for clause in self.clauses:
            for name in clause:
                if name not in known:
                    raise ArgumentError(
                        f"protected attribute {name!r} not in dataset "
                        f"(has {sorted(known)})"
                    )

    def mask(self, ds: "StructuredDataset") -> np.ndarray:
        """Boolean vector: entry i is True iff row i satisfies some clause."""
        self.validate(ds)
        out = np.zeros(ds.n_instances, dtype=bool)
        for clause in self.clauses:
            m = np.ones(ds.n_instances, dtype=bool)
            for name, value in clause.items():
                col = ds.protected_attribute_names.index(name)
                m &= ds.protected_attributes[:, col] == float(value)
            out |= m
        return out

    def describe(self) -> str:
        return " OR ".join(
            " AND ".join(f"{k}={v}" for k, v in clause.items())
            for clause in self.clauses
        )


def group_mask(ds: "StructuredDataset", spec: GroupSpec) -> np.ndarray:
    return spec.mask(ds)


class StructuredDataset:
    """Immutable table of features, binary labels, and protected attributes.

    All row-aligned arrays share the same instance count, every label equals
    the favorable or unfavorable value, and weights are nonnegative with a
    positive total. Arrays are stored read-only; transformations go through
    :meth:`derive` so provenance stays intact.
    """

    def __init__(
        self,
        features,
        feature_names: Sequence[str],
        labels,
        protected_attributes,
        protected_attribute_names: Sequence[str],
        *,
        favorable_label: float = 1.0,
        unfavorable_label: float = 0.0,
        privileged_protected_values: Sequence[Sequence[float]] | None = None,
        unprivileged_protected_values: Sequence[Sequence[float]] | None = None,
        instance_weights=None,
        metadata: dict | None = None,
    ):
        features = np.asarray(features, dtype=float)
        if features.ndim != 2:
            raise ArgumentError("features must be a 2-D matrix")
        labels = np.asarray(labels, dtype=float).reshape(-1)
        protected = np.asarray(protected_attributes, dtype=float)
        if protected.ndim == 1:
            protected = protected.reshape(-1, 1)
        n = features.shape[0]
        if labels.shape[0] != n or protected.shape[0] != n:
            raise ArgumentError(
                f"row mismatch: features {n}, labels {labels.shape[0]}, "
                f"protected {protected.shape[0]}"
            )
        if instance_weights is None:
            weights = np.ones(n, dtype=float)
        else:
            weights = np.asarray(instance_weights, dtype=float).reshape(-1)
            if weights.shape[0] != n:
                raise ArgumentError("instance_weights length does not match rows")
        if n == 0:
            raise EmptyDatasetError("dataset has no rows")

        feature_names = tuple(str(s) for s in feature_names)
        protected_names = tuple(str(s) for s in protected_attribute_names)
        if len(feature_names) != features.shape[1]:
            raise ArgumentError("feature_names length does not match feature columns")
        if len(protected_names) != protected.shape[1]:
            raise ArgumentError(
                "protected_attribute_names length does not match columns"
            )
        if len(set(feature_names)) != len(feature_names):
            raise ArgumentError("feature_names must be unique")
        if len(set(protected_names)) != len(protected_names):
            raise ArgumentError("protected_attribute_names must be unique")

        favorable_label = float(favorable_label)
        unfavorable_label = float(unfavorable_label)
        if favorable_label == unfavorable_label:
            raise ArgumentError("favorable and unfavorable labels must differ")
        admissible = np.isin(labels, [favorable_label, unfavorable_label])
        if not admissible.all():
            bad = labels[~admissible][0]
            raise ArgumentError(
                f"label {bad!r} is neither favorable ({favorable_label}) nor "
                f"unfavorable ({unfavorable_label})"
            )
        if (weights < 0).any():
            raise ArgumentError("instance weights must be nonnegative")
        total = float(weights.sum())
        if not total > 0:
            raise ArgumentError("total instance weight must be positive")

        if privileged_protected_values is None:
            privileged_protected_values = [(1.0,)] * len(protected_names)
        if unprivileged_protected_values is None:
            unprivileged_protected_values = [(0.0,)] * len(protected_names)
        priv_vals = tuple(tuple(float(v) for v in vs) for vs in privileged_protected_values)
        unpriv_vals = tuple(tuple(float(v) for v in vs) for vs in unprivileged_protected_values)
        if len(priv_vals) != len(protected_names) or len(unpriv_vals) != len(protected_names):
            raise ArgumentError(
                "privileged/unprivileged value lists must align with "
                "protected_attribute_names"
            )

        for arr in (features, labels, protected, weights):
            arr.setflags(write=False)

        self.features = features
        self.feature_names = feature_names
        self.labels = labels
        self.favorable_label = favorable_label
        self.unfavorable_label = unfavorable_label
        self.protected_attributes = protected
        self.protected_attribute_names = protected_names
        self.privileged_protected_values = priv_vals
        self.unprivileged_protected_values = unpriv_vals
        self.instance_weights = weights
        self.metadata = dict(metadata) if metadata else {}
        self.metadata.setdefault("provenance", Provenance(transform="constructed"))
        self._digest: str | None = None

    # -- basic introspection ------------------------------------------------

    @property
    def n_instances(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def provenance(self) -> Provenance:
        return self.metadata["provenance"]

    @property
    def total_weight(self) -> float:
        return float(self.instance_weights.sum())

    def favorable_mask(self) -> np.ndarray:
        return self.labels == self.favorable_label

    def binary_labels(self) -> np.ndarray:
        """Labels mapped to 1.0 (favorable) / 0.0 (unfavorable)."""
        return self.favorable_mask().astype(float)

    def default_privileged_spec(self, attribute: str | None = None) -> GroupSpec:
        return self._default_spec(self.privileged_protected_values, attribute)

    def default_unprivileged_spec(self, attribute: str | None = None) -> GroupSpec:
        return self._default_spec(self.unprivileged_protected_values, attribute)

    def _default_spec(self, value_sets, attribute):
        names = self.protected_attribute_names
        if attribute is not None:
            if attribute not in names:
                raise ArgumentError(f"unknown protected attribute {attribute!r}")
            idx = names.index(attribute)
            values = value_sets[idx]
            return GroupSpec([{attribute: v} for v in values])
        return GroupSpec(
            [{name: v} for name, vs in zip(names, value_sets) for v in vs]
        )

    def content_digest(self) -> str:
        """Stable digest of the data fields (provenance excluded)."""
        if self._digest is None:
            self._digest = _digest(
                np.ascontiguousarray(self.features).tobytes(),
                np.ascontiguousarray(self.labels).tobytes(),
                np.ascontiguousarray(self.protected_attributes).tobytes(),
                np.ascontiguousarray(self.instance_weights).tobytes(),
                repr(self.feature_names).encode(),
                repr(self.protected_attribute_names).encode(),
                repr((self.favorable_label, self.unfavorable_label)).encode(),
                repr(self.privileged_protected_values).encode(),
                repr(self.unprivileged_protected_values).encode(),
            )
        return self._digest

    def to_frame(self) -> pd.DataFrame:
        """Features, protected attributes, weights, and labels as a DataFrame."""
        df = pd.DataFrame(self.features, columns=list(self.feature_names))
        for i, name in enumerate(self.protected_attribute_names):
            df[f"protected:{name}"] = self.protected_attributes[:, i]
        df["instance_weight"] = self.instance_weights
        df["label"] = self.labels
        return df

    # -- transformations ----------------------------------------------------

    def derive(self, transform: str, params: dict | None = None, **overrides) -> "StructuredDataset":
        """New dataset with some fields replaced and provenance appended."""
        kwargs = dict(
            features=self.features,
            feature_names=self.feature_names,
            labels=self.labels,
            protected_attributes=self.protected_attributes,
            protected_attribute_names=self.protected_attribute_names,
            favorable_label=self.favorable_label,
            unfavorable_label=self.unfavorable_label,
            privileged_protected_values=self.privileged_protected_values,
            unprivileged_protected_values=self.unprivileged_protected_values,
            instance_weights=self.instance_weights,
        )
        metadata = overrides.pop("metadata", None)
        kwargs.update(overrides)
        meta = copy.copy(self.metadata)
        if metadata:
            meta.update(metadata)
        meta["provenance"] = Provenance(
            transform=transform,
            params_digest=_params_digest(params),
            parent=self.provenance,
        )
        kwargs["metadata"] = meta
        return StructuredDataset(**kwargs)

    def _take(self, rows: np.ndarray, transform: str, params: dict | None = None) -> "StructuredDataset":
        meta = {}
        for key in ("protected_attribute_raw", "raw_feature_values"):
            raw = self.metadata.get(key)
            if raw is not None:
                meta[key] = {k: v[rows] for k, v in raw.items()}
        parent_rows = self.metadata.get("parent_rows")
        meta["parent_rows"] = np.asarray(rows)
        if parent_rows is not None:
            # keep indices absolute w.r.t. the original load
            meta["source_rows"] = np.asarray(self.metadata.get("source_rows", parent_rows))[rows]
        elif "source_rows" in self.metadata:
            meta["source_rows"] = np.asarray(self.metadata["source_rows"])[rows]
        else:
            meta["source_rows"] = np.asarray(rows)
        return self.derive(
            transform,
            params,
            features=self.features[rows],
            labels=self.labels[rows],
            protected_attributes=self.protected_attributes[rows],
            instance_weights=self.instance_weights[rows],
            metadata=meta,
        )

    def split(
        self,
        fractions: Sequence[float],
        shuffle: bool = False,
        seed: int | None = None,
    ) -> list["StructuredDataset"]:
        """Partition rows into len(fractions)+1 (or len(fractions)) datasets.

        Fractions must be strictly positive and sum to at most 1; when the
        sum is below 1 the remainder forms a final partition. Sizes are
        floor(fraction * n) with leftover rows going to the last partition.
        Deterministic for a fixed seed.
        """
        fractions = [float(f) for f in fractions]
        if not fractions or any(f <= 0 for f in fractions):
            raise ArgumentError("fractions must be strictly positive")
        total = sum(fractions)
        if total > 1 + 1e-12:
            raise ArgumentError(f"fractions sum to {total}, must be <= 1")
        n = self.n_instances
        if shuffle:
            order = np.random.default_rng(seed).permutation(n)
        else:
            order = np.arange(n)

        takes_remainder = total < 1 - 1e-12
        sizes = [int(math.floor(f * n)) for f in fractions]
        if takes_remainder:
            sizes.append(n - sum(sizes))
        else:
            sizes[-1] = n - sum(sizes[:-1])
        out, start = [], 0
        for index, size in enumerate(sizes):
            rows = order[start : start + size]
            start += size
            if size == 0:
                raise EmptyDatasetError(
                    f"split partition {index} is empty (n={n}, fractions={fractions})"
                )
            out.append(
                self._take(
                    rows,
                    "split",
                    {"fractions": fractions, "shuffle": shuffle, "seed": seed, "index": index},
                )
            )
        return out

    def subset(self, mask: np.ndarray, transform: str = "subset") -> "StructuredDataset":
        rows = np.flatnonzero(np.asarray(mask, dtype=bool))
        if rows.size == 0:
            raise EmptyDatasetError("subset selects no rows")
        return self._take(rows, transform)

    def __eq__(self, other):
        if not isinstance(other, StructuredDataset):
            return NotImplemented
        return dataset_equal(self, other)

    def __repr__(self):
        return (
            f"StructuredDataset(n={self.n_instances}, features={self.n_features}, "
            f"protected={list(self.protected_attribute_names)})"
        )


COMPARABLE_FIELDS = frozenset(
    {
        "features",
        "feature_names",
        "labels",
        "favorable_label",
        "unfavorable_label",
        "protected_attributes",
        "protected_attribute_names",
        "privileged_protected_values",
        "unprivileged_protected_values",
        "instance_weights",
    }
)

_FEATURE_TOL = 1e-12


def dataset_equal(a: StructuredDataset, b: StructuredDataset, ignore: Iterable[str] = ()) -> bool:
    """Elementwise equality of the data fields of two datasets.

    Features compare within 1e-12; labels, weights, and protected attributes
    compare exactly. Provenance and metadata never participate. Fields named
    in ``ignore`` are skipped; unknown names raise.
    """
    ignore = set(ignore)
    unknown = ignore - COMPARABLE_FIELDS
    if unknown:
        raise ArgumentError(f"unknown field(s) in ignore: {sorted(unknown)}")

    def check(name, fn):
        return name in ignore or fn()

    try:
        return (
            check("feature_names", lambda: a.feature_names == b.feature_names)
            and check(
                "features",
                lambda: a.features.shape == b.features.shape
                and bool(np.all(np.abs(a.features - b.features) <= _FEATURE_TOL)),
            )
            and check(
                "labels",
                lambda: a.labels.shape == b.labels.shape and bool(np.all(a.labels == b.labels)),
            )
            and check("favorable_label", lambda: a.favorable_label == b.favorable_label)
            and check("unfavorable_label", lambda: a.unfavorable_label == b.unfavorable_label)
            and check(
                "protected_attribute_names",
                lambda: a.protected_attribute_names == b.protected_attribute_names,
            )
            and check(
                "protected_attributes",
                lambda: a.protected_attributes.shape == b.protected_attributes.shape
                and bool(np.all(a.protected_attributes == b.protected_attributes)),
            )
            and check(
                "privileged_protected_values",
                lambda: a.privileged_protected_values == b.privileged_protected_values,
            )
            and check(
                "unprivileged_protected_values",
                lambda: a.unprivileged_protected_values == b.unprivileged_protected_values,
            )
            and check(
                "instance_weights",
                lambda: a.instance_weights.shape == b.instance_weights.shape
                and bool(np.all(a.instance_weights == b.instance_weights)),
            )
        )
    except ValueError:
        # broadcast failure from a shape mismatch counts as inequality
        return False


# -- standardized loading ----------------------------------------------------


@dataclass
class ProtectedSpec:
    """How one protected attribute is derived from a source column.

    Privilege is defined either by an explicit set of raw values or by a
    numeric predicate ``{"op": one of > >= < <= ==, "value": x}``. The raw
    column values are retained in dataset metadata for bias localization.
    """

    name: str
    column: str | None = None
    privileged_values: list | None = None
    privileged_when: dict | None = None
    privileged_name: str | None = None
    unprivileged_name: str | None = None

    def source_column(self) -> str:
        return self.column or self.name

    def privileged_mask(self, series: pd.Series) -> np.ndarray:
        if self.privileged_when is not None:
            op = self.privileged_when.get("op")
            value = float(self.privileged_when.get("value"))
            vals = pd.to_numeric(series, errors="coerce").to_numpy(dtype=float)
            ops = {
                ">": np.greater,
                ">=": np.greater_equal,
                "<": np.less,
                "<=": np.less_equal,
                "==": np.equal,
            }
            if op not in ops:
                raise ArgumentError(f"unknown privileged_when op {op!r}")
            return ops[op](vals, value)
        if self.privileged_values is None:
            raise ArgumentError(
                f"protected attribute {self.name!r} needs privileged_values "
                "or privileged_when"
            )
        wanted = {str(v) for v in self.privileged_values}
        return series.astype(str).isin(wanted).to_numpy()


@dataclass
class StandardDatasetSpec:
    """Declarative recipe for turning a delimited text file into a dataset.

    ``feature_columns`` pass through as numerics, ``categorical_columns`` are
    one-hot encoded, and protected attributes are binarized to 1.0
    (privileged) / 0.0. Optional ``filter_rows`` / ``derive_columns`` hooks
    take and return a DataFrame; they are not representable in JSON specs.
    """

    label_column: str
    favorable_values: list
    protected: list[ProtectedSpec]
    feature_columns: list[str] = field(default_factory=list)
    categorical_columns: list[str] = field(default_factory=list)
    weight_column: str | None = None
    favorable_name: str | None = None
    unfavorable_name: str | None = None
    delimiter: str = ","
    na_values: list[str] = field(default_factory=lambda: ["?"])
    drop_missing: bool = True
    protected_as_features: bool = False
    filter_rows: Callable[[pd.DataFrame], pd.DataFrame] | None = None
    derive_columns: Callable[[pd.DataFrame], pd.DataFrame] | None = None
    name: str | None = None
    filename: str | None = None

    def used_columns(self) -> list[str]:
        cols = [self.label_column]
        cols += [p.source_column() for p in self.protected]
        cols += list(self.feature_columns) + list(self.categorical_columns)
        if self.weight_column:
            cols.append(self.weight_column)
        # preserve order, drop duplicates
        seen, out = set(), []
        for c in cols:
            if c not in seen:
                seen.add(c)
                out.append(c)
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "StandardDatasetSpec":
        raw = dict(raw)
        protected = [ProtectedSpec(**p) for p in raw.pop("protected")]
        return cls(protected=protected, **raw)

    @classmethod
    def from_json(cls, path) -> "StandardDatasetSpec":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        if self.filter_rows or self.derive_columns:
            raise ArgumentError("specs with callable hooks cannot be serialized")
        out = {
            "label_column": self.label_column,
            "favorable_values": self.favorable_values,
            "protected": [
                {k: v for k, v in vars(p).items() if v is not None}
                for p in self.protected
            ],
            "feature_columns": self.feature_columns,
            "categorical_columns": self.categorical_columns,
            "weight_column": self.weight_column,
            "favorable_name": self.favorable_name,
            "unfavorable_name": self.unfavorable_name,
            "delimiter": self.delimiter,
            "na_values": self.na_values,
            "drop_missing": self.drop_missing,
            "protected_as_features": self.protected_as_features,
            "name": self.name,
            "filename": self.filename,
        }
        return {k: v for k, v in out.items() if v is not None}


def preset_names() -> list[str]:
    root = resources.files("fairlab.presets")
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def preset_spec(name: str) -> StandardDatasetSpec:
    """Load one of the shipped dataset specs (adult, german, compas)."""
    valid = preset_names()
    if name not in valid:
        raise ArgumentError(f"unknown preset {name!r}; available: {', '.join(valid)}")
    raw = json.loads(resources.files("fairlab.presets").joinpath(f"{name}.json").read_text())
    return StandardDatasetSpec.from_dict(raw)


def load_standard(source, spec: StandardDatasetSpec) -> StructuredDataset:
    """Load a header-bearing delimited file into a StructuredDataset.

    Rows failing the filter hook (by default: rows with missing values in any
    used column) are dropped and counted, categoricals are one-hot encoded in
    deterministic (column, value-lexicographic) order, and labels are mapped
    to 1.0 favorable / 0.0 unfavorable.
    """
    df = pd.read_csv(
        source,
        sep=spec.delimiter,
        na_values=spec.na_values,
        skipinitialspace=True,
    )
    df.columns = [str(c).strip() for c in df.columns]

    if spec.derive_columns is not None:
        df = spec.derive_columns(df)

    missing = [c for c in spec.used_columns() if c not in df.columns]
    if missing:
        raise SchemaError(
            f"column(s) {missing} not found in source (has {list(df.columns)})"
        )

    n_raw = len(df)
    if spec.filter_rows is not None:
        df = spec.filter_rows(df)
    if spec.drop_missing:
        df = df.dropna(subset=spec.used_columns())
    dropped = n_raw - len(df)
    if len(df) == 0:
        raise EmptyDatasetError("no rows remain after filtering")
    df = df.reset_index(drop=True)

    # labels
    observed = set(df[spec.label_column].astype(str).unique())
    favorable = {str(v) for v in spec.favorable_values}
    if not favorable:
        raise ArgumentError("favorable value set is empty")
    if not favorable & observed:
        raise ArgumentError(
            f"no favorable value {sorted(favorable)} observed in "
            f"{spec.label_column!r} (observed {sorted(observed)})"
        )
    if observed <= favorable:
        raise ArgumentError(
            "favorable values must be a strict subset of observed label values"
        )
    labels = df[spec.label_column].astype(str).isin(favorable).to_numpy(dtype=float)

    # protected attributes, binarized, raw values retained
    prot_cols, prot_names, raw_values = [], [], {}
    priv_vals, unpriv_vals, prot_maps = [], [], []
    for p in spec.protected:
        series = df[p.source_column()]
        priv = p.privileged_mask(series)
        prot_cols.append(priv.astype(float))
        prot_names.append(p.name)
        raw_values[p.name] = series.to_numpy()
        priv_vals.append((1.0,))
        unpriv_vals.append((0.0,))
        prot_maps.append(
            {
                1.0: p.privileged_name or f"{p.name}:privileged",
                0.0: p.unprivileged_name or f"{p.name}:unprivileged",
            }
        )
    protected = np.column_stack(prot_cols) if prot_cols else np.zeros((len(df), 0))

    # numeric features
    columns, names = [], []
    for col in spec.feature_columns:
        series = pd.to_numeric(df[col], errors="coerce")
        bad = series.isna() & df[col].notna()
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise ParseError(
                f"non-numeric value {df[col].iloc[row]!r} in column {col!r} at row {row}",
                row=row,
            )
        columns.append(series.to_numpy(dtype=float))
        names.append(col)

    # one-hot categoricals, (attribute, value) lexicographic
    categorical_groups: dict[str, list[str]] = {}
    raw_feature_values: dict[str, np.ndarray] = {}
    for col in sorted(set(spec.categorical_columns)):
        values = df[col].astype(str)
        raw_feature_values[col] = values.to_numpy()
        group = []
        for value in sorted(values.unique()):
            columns.append((values == value).to_numpy(dtype=float))
            encoded = f"{col}={value}"
            names.append(encoded)
            group.append(encoded)
        categorical_groups[col] = group

    if spec.protected_as_features:
        for name, col in zip(prot_names, prot_cols):
            columns.append(col)
            names.append(name)

    if not columns:
        raise SchemaError("spec keeps zero feature columns")
    features = np.column_stack(columns)

    weights = None
    if spec.weight_column:
        weights = pd.to_numeric(df[spec.weight_column], errors="coerce").to_numpy(dtype=float)
        if np.isnan(weights).any():
            row = int(np.flatnonzero(np.isnan(weights))[0])
            raise ParseError(
                f"non-numeric weight in column {spec.weight_column!r} at row {row}",
                row=row,
            )

    label_map = {
        1.0: spec.favorable_name or "/".join(sorted(favorable)),
        0.0: spec.unfavorable_name or "other",
    }
    metadata = {
        "label_maps": [label_map],
        "protected_attribute_maps": prot_maps,
        "protected_attribute_raw": raw_values,
        "categorical_groups": categorical_groups,
        "raw_feature_values": raw_feature_values,
        "dropped_rows": dropped,
        "source_rows": np.arange(len(df)),
        "provenance": Provenance(
            transform="load_standard", params_digest=_params_digest(_spec_digest_payload(spec))
        ),
    }
    if spec.name:
        metadata["dataset_name"] = spec.name
    return StructuredDataset(
        features=features,
        feature_names=names,
        labels=labels,
        protected_attributes=protected,
        protected_attribute_names=prot_names,
        privileged_protected_values=priv_vals,
        unprivileged_protected_values=unpriv_vals,
        instance_weights=weights,
        metadata=metadata,
    )


def _spec_digest_payload(spec: StandardDatasetSpec) -> dict:
    try:
        return spec.to_dict()
    except ArgumentError:
        return {"name": spec.name or "custom", "label_column": spec.label_column}


def load_preset(name: str, data_dir) -> StructuredDataset:
    """Load a preset dataset from its conventional file under ``data_dir``."""
    spec = preset_spec(name)
    path = Path(data_dir) / (spec.filename or f"{name}.csv")
    if not path.exists():
        raise CapabilityError(
            f"data file {path} not found; generate demo data or supply the file"
        )
    return load_standard(path, spec)
