import math

import numpy as np
import pytest

from fairlab import (
    ArgumentError,
    CapabilityError,
    GroupSpec,
    MetricContext,
    StructuredDataset,
    explain_json,
    explain_text,
    format_number,
    localize_feature,
    localize_protected,
    statistical_parity_difference,
)
from fairlab.explain import ExplanationRecord

from conftest import group_pair, make_ds

PRIV, UNPRIV = group_pair()


class TestFormatNumber:
    def test_four_decimals_trimmed(self):
        assert format_number(0.9) == "0.9"
        assert format_number(0.25) == "0.25"
        assert format_number(-1.0 / 3.0) == "-0.3333"
        assert format_number(2.0) == "2"

    def test_negative_zero_normalized(self):
        assert format_number(-0.00001) == "0"

    def test_non_finite(self):
        assert format_number(math.inf) == "inf"
        assert format_number(-math.inf) == "-inf"
        assert format_number(math.nan) == "undefined"
        assert format_number(None) == "undefined"


class TestExplanations:
    def _ctx(self):
        ds = make_ds([1, 0, 0, 1, 1, 0], [0, 0, 0, 1, 1, 1])
        return ds, MetricContext(ds, PRIV, UNPRIV)

    def test_text_embeds_value_and_count(self):
        ds, ctx = self._ctx()
        text = explain_text("statistical_parity_difference", ctx)
        assert "6 instances" in text
        assert format_number(statistical_parity_difference(ds, PRIV, UNPRIV)) in text

    def test_json_value_bit_equal(self):
        ds, ctx = self._ctx()
        record = explain_json("statistical_parity_difference", ctx)
        assert record.stats["value"] == statistical_parity_difference(ds, PRIV, UNPRIV)
        assert record.meta["name"] == "statistical_parity_difference"
        assert record.meta["ideal"] == 0.0

    def test_json_round_trip(self):
        _, ctx = self._ctx()
        record = explain_json("disparate_impact", ctx)
        clone = ExplanationRecord.from_dict(record.to_dict())
        assert clone.to_dict() == record.to_dict()

    def test_undefined_explained_not_raised(self):
        ds = make_ds([0, 0, 0, 0], [0, 0, 1, 1])
        ctx = MetricContext(ds, PRIV, UNPRIV)
        text = explain_text("disparate_impact", ctx)
        assert "undefined" in text
        record = explain_json("disparate_impact", ctx)
        assert record.stats["value"] is None
        assert "undefined_reason" in record.stats

    def test_scoped_explanation(self):
        _, ctx = self._ctx()
        text = explain_text("base_rate", ctx, scope="privileged")
        assert "3" in text

    def test_overlapping_groups_rejected(self):
        ds = make_ds([1, 0], [1, 0])
        both = GroupSpec([{"g": 1.0}, {"g": 0.0}])
        with pytest.raises(ArgumentError, match="overlap"):
            MetricContext(ds, both, UNPRIV)


class TestLocalizeProtected:
    def _categorical_ds(self):
        # three categories with base rates 0.8, 0.4, 0.4 -> overall 8/15
        labels = [1] * 4 + [0] + [1] * 2 + [0] * 3 + [1] * 2 + [0] * 3
        raw = ["a"] * 5 + ["b"] * 5 + ["c"] * 5
        groups = [1.0 if c == "a" else 0.0 for c in raw]
        ds = make_ds(labels, groups)
        meta = dict(ds.metadata)
        meta["protected_attribute_raw"] = {"g": np.array(raw)}
        return StructuredDataset(
            ds.features, ds.feature_names, ds.labels, ds.protected_attributes,
            ds.protected_attribute_names, metadata=meta,
        )

    def test_flags_deviating_category(self):
        ds = self._categorical_ds()
        segments = localize_protected(ds, "base_rate", attribute="g", tau=0.25)
        by_cat = {s.category: s for s in segments}
        assert by_cat["a"].flag == "localized"
        assert by_cat["a"].direction == "enhanced"
        assert by_cat["b"].flag == "not-localized"
        assert by_cat["c"].flag == "not-localized"

    def test_tau_infinite_flags_nothing(self):
        ds = self._categorical_ds()
        segments = localize_protected(ds, "base_rate", attribute="g", tau=math.inf)
        assert all(s.flag == "not-localized" for s in segments)

    def test_segments_partition_population(self):
        ds = self._categorical_ds()
        segments = localize_protected(ds, "base_rate", attribute="g")
        assert sum(s.count for s in segments) == ds.n_instances

    def test_numeric_bins(self):
        rng = np.random.default_rng(0)
        n = 200
        age = rng.uniform(18, 80, n)
        labels = (age > 40).astype(float)
        labels[:3] = [0, 1, 0]  # keep both classes everywhere
        ds = make_ds(labels, (age > 40).astype(float))
        meta = dict(ds.metadata)
        meta["protected_attribute_raw"] = {"g": age}
        ds = StructuredDataset(
            ds.features, ds.feature_names, ds.labels, ds.protected_attributes,
            ds.protected_attribute_names, metadata=meta,
        )
        segments = localize_protected(ds, "base_rate", attribute="g", bins=4)
        assert len(segments) == 4
        assert sum(s.count for s in segments) == n
        assert all(s.lower is not None and s.upper is not None for s in segments)
        # young bins diminished, old bins enhanced
        assert segments[0].value < segments[-1].value

    def test_requires_raw_values(self):
        ds = make_ds([1, 0], [1, 0])
        with pytest.raises(CapabilityError):
            localize_protected(ds, "base_rate", attribute="g")

    def test_two_dataset_metric_rejected(self):
        ds = self._categorical_ds()
        with pytest.raises(ArgumentError):
            localize_protected(ds, "statistical_parity_difference", attribute="g")


class TestLocalizeFeature:
    def _ctx(self):
        # DI per color: red 2.0, blue 1.0, green 1.0 (by construction)
        labels, groups, color = [], [], []
        # red: priv rate 0.25 (1/4), unpriv rate 0.5 (2/4) -> DI 2.0
        labels += [1, 0, 0, 0] + [1, 1, 0, 0]
        groups += [1, 1, 1, 1] + [0, 0, 0, 0]
        color += ["red"] * 8
        # blue: priv rate 0.5, unpriv rate 0.5 -> DI 1.0
        labels += [1, 0] + [1, 0]
        groups += [1, 1] + [0, 0]
        color += ["blue"] * 4
        # green: same as blue
        labels += [1, 0] + [1, 0]
        groups += [1, 1] + [0, 0]
        color += ["green"] * 4
        features = np.arange(len(labels), dtype=float)
        ds = make_ds(labels, groups, features=features)
        meta = dict(ds.metadata)
        meta["raw_feature_values"] = {"color": np.array(color)}
        ds = StructuredDataset(
            ds.features, ds.feature_names, ds.labels, ds.protected_attributes,
            ds.protected_attribute_names, metadata=meta,
        )
        return ds, MetricContext(ds, PRIV, UNPRIV)

    def test_flags_exactly_one_category(self):
        _, ctx = self._ctx()
        segments = localize_feature(ctx, "disparate_impact", "color", tau=0.5)
        flagged = [s for s in segments if s.flag == "localized"]
        assert [s.category for s in flagged] == ["red"]
        assert segments[0].category == "red"  # ranked most severe first

    def test_severity_is_distance_from_ideal(self):
        _, ctx = self._ctx()
        segments = localize_feature(ctx, "disparate_impact", "color")
        red = next(s for s in segments if s.category == "red")
        assert red.value == pytest.approx(2.0)
        assert red.severity == pytest.approx(1.0)  # ideal DI is 1.0

    def test_unknown_feature(self):
        _, ctx = self._ctx()
        with pytest.raises(ArgumentError, match="unknown feature"):
            localize_feature(ctx, "disparate_impact", "shape")

    def test_undefined_categories_appended(self):
        labels = [1, 0, 1, 0, 1, 1]
        groups = [1, 0, 1, 0, 1, 1]
        ds = make_ds(labels, groups)
        meta = dict(ds.metadata)
        # category "z" contains only privileged rows -> SPD undefined there
        meta["raw_feature_values"] = {"f": np.array(["w", "w", "w", "w", "z", "z"])}
        ds = StructuredDataset(
            ds.features, ds.feature_names, ds.labels, ds.protected_attributes,
            ds.protected_attribute_names, metadata=meta,
        )
        ctx = MetricContext(ds, PRIV, UNPRIV)
        segments = localize_feature(ctx, "statistical_parity_difference", "f")
        z = next(s for s in segments if s.category == "z")
        assert z.flag == "undefined"
        assert z.value is None
        assert segments[-1].category == "z"  # unranked, at the tail
