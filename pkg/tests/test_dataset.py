import json

import numpy as np
import pytest

from fairlab import (
    ArgumentError,
    CapabilityError,
    EmptyDatasetError,
    GroupSpec,
    StandardDatasetSpec,
    StructuredDataset,
    dataset_equal,
    load_preset,
    load_standard,
    preset_names,
    preset_spec,
)
from fairlab.dataset import ProtectedSpec, Provenance

from conftest import group_pair, make_ds


class TestConstruction:
    def test_basic_fields(self):
        ds = make_ds([1, 0, 1], [1, 0, 1], weights=[1, 2, 3])
        assert ds.n_instances == 3
        assert ds.n_features == 1
        assert ds.total_weight == 6.0
        assert ds.binary_labels().tolist() == [1.0, 0.0, 1.0]
        assert ds.favorable_mask().tolist() == [True, False, True]

    def test_arrays_are_read_only(self):
        ds = make_ds([1, 0], [1, 0])
        with pytest.raises(ValueError):
            ds.features[0, 0] = 9.0
        with pytest.raises(ValueError):
            ds.labels[0] = 0.0

    def test_row_mismatch_rejected(self):
        with pytest.raises(ArgumentError, match="row mismatch"):
            StructuredDataset(np.zeros((3, 1)), ["x"], [1, 0], [[1], [0], [1]], ["g"])

    def test_empty_rejected(self):
        with pytest.raises(EmptyDatasetError):
            StructuredDataset(np.zeros((0, 1)), ["x"], [], np.zeros((0, 1)), ["g"])

    def test_alien_label_rejected(self):
        with pytest.raises(ArgumentError, match="neither favorable"):
            make_ds([1, 2], [1, 0])

    def test_custom_label_values(self):
        ds = StructuredDataset(
            np.zeros((2, 1)), ["x"], [2.0, 5.0], [[1], [0]], ["g"],
            favorable_label=2.0, unfavorable_label=5.0,
        )
        assert ds.binary_labels().tolist() == [1.0, 0.0]

    def test_negative_weight_rejected(self):
        with pytest.raises(ArgumentError, match="nonnegative"):
            make_ds([1, 0], [1, 0], weights=[1.0, -0.5])

    def test_zero_total_weight_rejected(self):
        with pytest.raises(ArgumentError, match="positive"):
            make_ds([1, 0], [1, 0], weights=[0.0, 0.0])

    def test_duplicate_feature_names_rejected(self):
        with pytest.raises(ArgumentError, match="unique"):
            StructuredDataset(np.zeros((2, 2)), ["x", "x"], [1, 0], [[1], [0]], ["g"])

    def test_equal_label_values_rejected(self):
        with pytest.raises(ArgumentError, match="must differ"):
            StructuredDataset(
                np.zeros((2, 1)), ["x"], [1, 1], [[1], [0]], ["g"],
                favorable_label=1.0, unfavorable_label=1.0,
            )


class TestGroupSpec:
    def test_mask_or_of_clauses(self):
        ds = make_ds([1, 0, 1, 0], [1, 0, 1, 0])
        spec = GroupSpec([{"g": 1.0}, {"g": 0.0}])
        assert spec.mask(ds).all()

    def test_unknown_attribute_rejected(self):
        ds = make_ds([1, 0], [1, 0])
        with pytest.raises(ArgumentError, match="not in dataset"):
            GroupSpec([{"race": 1.0}]).mask(ds)

    def test_empty_clause_rejected(self):
        with pytest.raises(ArgumentError):
            GroupSpec([])
        with pytest.raises(ArgumentError):
            GroupSpec([{}])

    def test_describe(self):
        spec = GroupSpec([{"sex": 1.0}, {"age": 0.0}])
        assert spec.describe() == "sex=1.0 OR age=0.0"

    def test_default_specs_from_declared_values(self):
        ds = make_ds([1, 0], [1, 0])
        priv, unpriv = ds.default_privileged_spec("g"), ds.default_unprivileged_spec("g")
        assert priv.mask(ds).tolist() == [True, False]
        assert unpriv.mask(ds).tolist() == [False, True]


class TestSplit:
    def test_sizes_and_partition(self):
        ds = make_ds([1, 0] * 10, [1, 0] * 10)
        train, test = ds.split((0.7, 0.3))
        assert train.n_instances == 14
        assert test.n_instances == 6

    def test_remainder_partition(self):
        ds = make_ds([1, 0] * 10, [1, 0] * 10)
        parts = ds.split((0.5, 0.2))  # remainder 0.3 becomes a third part
        assert [p.n_instances for p in parts] == [10, 4, 6]

    def test_seeded_shuffle_is_deterministic(self):
        ds = make_ds([1, 0] * 25, [1, 0] * 25)
        a1, b1 = ds.split((0.6, 0.4), shuffle=True, seed=3)
        a2, b2 = ds.split((0.6, 0.4), shuffle=True, seed=3)
        assert dataset_equal(a1, a2) and dataset_equal(b1, b2)
        a3, _ = ds.split((0.6, 0.4), shuffle=True, seed=4)
        assert not dataset_equal(a1, a3)

    def test_unshuffled_is_contiguous(self):
        ds = make_ds([1, 0, 1, 0], [1, 0, 1, 0], features=[10, 11, 12, 13])
        head, tail = ds.split((0.5, 0.5))
        assert head.features[:, 0].tolist() == [10.0, 11.0]
        assert tail.features[:, 0].tolist() == [12.0, 13.0]

    def test_bad_fractions_rejected(self):
        ds = make_ds([1, 0], [1, 0])
        with pytest.raises(ArgumentError):
            ds.split((0.8, 0.4))
        with pytest.raises(ArgumentError):
            ds.split((-0.1, 0.6))
        with pytest.raises(ArgumentError):
            ds.split(())

    def test_empty_partition_rejected(self):
        ds = make_ds([1, 0, 1], [1, 0, 1])
        with pytest.raises(EmptyDatasetError):
            ds.split((0.1, 0.9))


class TestProvenanceAndEquality:
    def test_derive_appends_provenance(self):
        ds = make_ds([1, 0], [1, 0])
        child = ds.derive("reweigh", {"k": 1})
        assert child.provenance.transform == "reweigh"
        assert child.provenance.parent is ds.provenance
        assert child.provenance.depth == ds.provenance.depth + 1

    def test_provenance_chain_newest_first(self):
        ds = make_ds([1, 0], [1, 0])
        child = ds.derive("a").derive("b")
        assert [p.transform for p in child.provenance.chain()] == [
            "b", "a", "constructed",
        ]

    def test_equality_ignores_provenance(self):
        ds = make_ds([1, 0], [1, 0])
        assert dataset_equal(ds, ds.derive("noop"))
        assert ds == ds.derive("noop")

    def test_equality_detects_label_change(self):
        ds = make_ds([1, 0], [1, 0])
        flipped = ds.derive("flip", labels=np.array([0.0, 1.0]))
        assert not dataset_equal(ds, flipped)
        assert dataset_equal(ds, flipped, ignore=["labels"])

    def test_equality_unknown_ignore_field(self):
        ds = make_ds([1, 0], [1, 0])
        with pytest.raises(ArgumentError, match="unknown field"):
            dataset_equal(ds, ds, ignore=["nope"])

    def test_content_digest_stable_and_sensitive(self):
        ds = make_ds([1, 0], [1, 0])
        assert ds.content_digest() == make_ds([1, 0], [1, 0]).content_digest()
        assert ds.content_digest() != make_ds([0, 1], [1, 0]).content_digest()


class TestStandardLoading:
    def _write(self, tmp_path, text, name="data.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    def _spec(self, **overrides):
        base = dict(
            label_column="outcome",
            favorable_values=["yes"],
            protected=[ProtectedSpec(name="sex", privileged_values=["m"])],
            feature_columns=["amount"],
            categorical_columns=["color"],
        )
        base.update(overrides)
        return StandardDatasetSpec(**base)

    def test_one_hot_and_label_mapping(self, tmp_path):
        path = self._write(
            tmp_path,
            "outcome,sex,amount,color\nyes,m,1.5,red\nno,f,2.5,blue\nyes,f,3.5,red\n",
        )
        ds = load_standard(path, self._spec())
        assert ds.feature_names == ("amount", "color=blue", "color=red")
        assert ds.labels.tolist() == [1.0, 0.0, 1.0]
        assert ds.protected_attributes[:, 0].tolist() == [1.0, 0.0, 0.0]

    def test_missing_rows_dropped(self, tmp_path):
        path = self._write(
            tmp_path,
            "outcome,sex,amount,color\n"
            "yes,m,1.5,red\nno,f,?,blue\nyes,f,3.5,red\nno,m,4.5,blue\n",
        )
        ds = load_standard(path, self._spec())
        assert ds.n_instances == 3

    def test_numeric_privilege_predicate(self, tmp_path):
        path = self._write(
            tmp_path, "outcome,age,amount,color\nyes,30,1,red\nno,19,2,red\n"
        )
        spec = self._spec(
            protected=[ProtectedSpec(name="age", privileged_when={"op": ">", "value": 25})]
        )
        ds = load_standard(path, spec)
        assert ds.protected_attributes[:, 0].tolist() == [1.0, 0.0]

    def test_protected_as_features_keeps_column(self, tmp_path):
        path = self._write(
            tmp_path, "outcome,sex,amount,color\nyes,m,1,red\nno,f,2,red\n"
        )
        with_col = load_standard(path, self._spec(protected_as_features=True))
        without = load_standard(path, self._spec())
        assert "sex" in with_col.feature_names
        assert "sex" not in without.feature_names

    def test_raw_values_kept_for_localization(self, tmp_path):
        path = self._write(
            tmp_path, "outcome,sex,amount,color\nyes,m,1,red\nno,f,2,red\n"
        )
        ds = load_standard(path, self._spec())
        raw = ds.metadata["protected_attribute_raw"]["sex"]
        assert list(raw) == ["m", "f"]

    def test_spec_json_round_trip(self, tmp_path):
        spec = self._spec()
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(spec.to_dict()), encoding="utf-8")
        loaded = StandardDatasetSpec.from_json(spec_path)
        assert loaded.label_column == "outcome"
        assert loaded.protected[0].name == "sex"
        assert loaded.to_dict() == spec.to_dict()

    def test_missing_schema_column_rejected(self, tmp_path):
        path = self._write(tmp_path, "outcome,sex,color\nyes,m,red\n")
        with pytest.raises(Exception) as err:
            load_standard(path, self._spec())
        assert "amount" in str(err.value)


class TestPresets:
    def test_preset_catalog(self):
        assert preset_names() == ["adult", "compas", "german"]
        spec = preset_spec("german")
        assert [p.name for p in spec.protected] == ["sex", "age"]

    def test_unknown_preset(self):
        with pytest.raises(ArgumentError, match="unknown preset"):
            preset_spec("iris")

    def test_missing_data_file(self, tmp_path):
        with pytest.raises(CapabilityError, match="german"):
            load_preset("german", tmp_path)

    def test_demo_presets_load(self, demo_dir):
        for name in preset_names():
            ds = load_preset(name, demo_dir)
            assert ds.n_instances > 500
            # every preset declares at least one protected attribute
            assert len(ds.protected_attribute_names) >= 1


class TestProvenanceRecord:
    def test_cycle_detected(self):
        a = Provenance(transform="a")
        b = Provenance(transform="b", parent=a)
        a.parent = b
        with pytest.raises(ArgumentError, match="cycle"):
            a.chain()
