import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairlab import (
    ArgumentError,
    DegenerateDataError,
    LogisticModel,
    NumericalError,
    SchemaError,
    TrainConfig,
    apply_threshold,
    balanced_accuracy,
    fit_logistic,
    predict_scores,
    tune_threshold,
)
from fairlab.model import loss_and_grad

from conftest import make_ds, random_dataset, scored_of


def separable_toy():
    # two clusters, linearly separable on x0
    feats = np.array(
        [[-2.0, 0.1], [-1.8, -0.2], [-2.2, 0.3], [-1.9, 0.0],
         [2.0, 0.2], [1.8, -0.1], [2.2, 0.0], [1.9, 0.3]]
    )
    labels = [0, 0, 0, 0, 1, 1, 1, 1]
    groups = [0, 1, 0, 1, 0, 1, 0, 1]
    return make_ds(labels, groups, features=feats)


class TestFit:
    def test_separable_toy_perfect_at_half(self):
        ds = separable_toy()
        model = fit_logistic(ds, TrainConfig(l2=0.01))
        pred = apply_threshold(predict_scores(model, ds), 0.5)
        assert (pred.labels == ds.labels).all()
        assert balanced_accuracy(ds, pred) == 1.0

    def test_one_class_rejected(self):
        ds = make_ds([1, 1, 1], [1, 0, 1])
        with pytest.raises(DegenerateDataError):
            fit_logistic(ds)

    def test_zero_weight_class_rejected(self):
        ds = make_ds([1, 1, 0], [1, 0, 1], weights=[1.0, 1.0, 0.0])
        with pytest.raises(DegenerateDataError):
            fit_logistic(ds)

    def test_non_finite_data_raises(self):
        feats = np.array([[np.nan], [1.0]])
        ds = make_ds([1, 0], [1, 0], features=feats)
        with pytest.raises(NumericalError):
            fit_logistic(ds, TrainConfig(standardize=False))

    def test_weight_equals_duplication(self):
        rng = np.random.default_rng(7)
        feats = rng.normal(size=(12, 2))
        labels = rng.integers(0, 2, 12).astype(float)
        labels[:2] = [0, 1]
        groups = rng.integers(0, 2, 12).astype(float)
        weighted = make_ds(labels, groups, features=feats,
                           weights=[2.0] * 4 + [1.0] * 8)
        dup_feats = np.vstack([feats[:4], feats])
        dup_labels = np.concatenate([labels[:4], labels])
        dup_groups = np.concatenate([groups[:4], groups])
        duplicated = make_ds(dup_labels, dup_groups, features=dup_feats)
        cfg = TrainConfig(l2=1e-3, tol=1e-10, max_iter=2000)
        m1, m2 = fit_logistic(weighted, cfg), fit_logistic(duplicated, cfg)
        # same minimizer up to optimizer tolerance
        assert np.allclose(m1.coef, m2.coef, atol=1e-5)
        assert m1.intercept == pytest.approx(m2.intercept, abs=1e-5)

    def test_deterministic(self):
        ds = separable_toy()
        m1 = fit_logistic(ds, TrainConfig())
        m2 = fit_logistic(ds, TrainConfig())
        assert m1.digest() == m2.digest()

    def test_standardization_preserves_score_order(self):
        ds = separable_toy()
        cfg_on = TrainConfig(l2=0.0, tol=1e-12, max_iter=5000, standardize=True)
        cfg_off = TrainConfig(l2=0.0, tol=1e-12, max_iter=5000, standardize=False)
        s_on = predict_scores(fit_logistic(ds, cfg_on), ds).scores
        s_off = predict_scores(fit_logistic(ds, cfg_off), ds).scores
        assert np.array_equal(np.argsort(s_on, kind="stable"),
                              np.argsort(s_off, kind="stable"))


class TestGradient:
    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10_000))
    def test_matches_central_differences(self, seed):
        rng = np.random.default_rng(seed)
        n, d = 14, 3
        x = rng.normal(size=(n, d))
        y = rng.integers(0, 2, n).astype(float)
        y[:2] = [0, 1]
        w = rng.uniform(0.3, 2.0, n)
        coef = rng.normal(scale=0.8, size=d)
        intercept = float(rng.normal(scale=0.8))
        l2 = 0.05
        eps = 1e-6

        _, g_coef, g_int = loss_and_grad(x, y, w, coef, intercept, l2)
        for j in range(d):
            e = np.zeros(d)
            e[j] = eps
            hi, _, _ = loss_and_grad(x, y, w, coef + e, intercept, l2)
            lo, _, _ = loss_and_grad(x, y, w, coef - e, intercept, l2)
            numeric = (hi - lo) / (2 * eps)
            assert abs(g_coef[j] - numeric) / max(abs(numeric), 1e-8) < 1e-5
        hi, _, _ = loss_and_grad(x, y, w, coef, intercept + eps, l2)
        lo, _, _ = loss_and_grad(x, y, w, coef, intercept - eps, l2)
        numeric = (hi - lo) / (2 * eps)
        assert abs(g_int - numeric) / max(abs(numeric), 1e-8) < 1e-5

    def test_intercept_not_penalized(self):
        x = np.array([[1.0], [-1.0]])
        y = np.array([1.0, 0.0])
        w = np.ones(2)
        with_l2, _, _ = loss_and_grad(x, y, w, np.zeros(1), 3.0, 10.0)
        without, _, _ = loss_and_grad(x, y, w, np.zeros(1), 3.0, 0.0)
        assert with_l2 == pytest.approx(without)


class TestScoresAndThresholds:
    def test_hard_labels_strict_inequality(self):
        ds = make_ds([1, 0, 1], [1, 0, 1])
        sp = scored_of(ds, [0.3, 0.5, 0.7], threshold=0.5)
        # 0.5 is not > 0.5, so the middle row stays unfavorable
        assert sp.hard_labels().tolist() == [0.0, 0.0, 1.0]

    def test_boundary_thresholds(self):
        ds = make_ds([1, 0, 1], [1, 0, 1])
        sp = scored_of(ds, [0.2, 0.5, 0.9])
        assert apply_threshold(sp, 0.0).favorable_mask().all()
        assert not apply_threshold(sp, 1.0).favorable_mask().any()

    def test_monotone_in_threshold(self):
        rng = np.random.default_rng(3)
        ds = random_dataset(rng, scores=False)
        sp = scored_of(ds, rng.uniform(0, 1, ds.n_instances))
        counts = [
            int(apply_threshold(sp, t).favorable_mask().sum())
            for t in np.linspace(0.0, 1.0, 11)
        ]
        assert counts == sorted(counts, reverse=True)

    def test_scores_read_only(self):
        ds = make_ds([1, 0], [1, 0])
        sp = scored_of(ds, [0.4, 0.6])
        with pytest.raises(ValueError):
            sp.scores[0] = 0.9

    def test_predicted_dataset_keeps_everything_but_labels(self):
        ds = make_ds([1, 0], [1, 0], weights=[2.0, 3.0])
        pred = apply_threshold(scored_of(ds, [0.9, 0.8]), 0.5)
        assert pred.labels.tolist() == [1.0, 1.0]
        assert pred.instance_weights.tolist() == [2.0, 3.0]
        assert (pred.features == ds.features).all()
        assert pred.provenance.transform == "predict"

    def test_feature_name_mismatch(self):
        ds = separable_toy()
        model = fit_logistic(ds)
        other = make_ds([1, 0], [1, 0])  # single feature named x0
        with pytest.raises(SchemaError):
            predict_scores(model, other)


class TestTuneThreshold:
    def test_hand_case_grid_rule(self):
        ds = make_ds([0, 0, 1, 1], [1, 0, 1, 0])
        sp = scored_of(ds, [0.2, 0.4, 0.6, 0.8])
        t = tune_threshold(sp, ds, candidates=100)
        assert t == pytest.approx(41 / 101, abs=1e-15)

    def test_perfect_separation_balacc_one(self):
        ds = make_ds([0, 0, 1, 1], [1, 0, 1, 0])
        sp = scored_of(ds, [0.1, 0.2, 0.8, 0.9])
        t = tune_threshold(sp, ds)
        pred = apply_threshold(sp, t)
        assert balanced_accuracy(ds, pred) == 1.0

    def test_constant_scores_tie_takes_smallest(self):
        ds = make_ds([0, 1, 0, 1], [1, 0, 1, 0])
        sp = scored_of(ds, [0.5] * 4)
        t = tune_threshold(sp, ds, candidates=100)
        assert t == pytest.approx(1 / 101, abs=1e-15)
        pred = apply_threshold(sp, t)
        assert balanced_accuracy(ds, pred) == pytest.approx(0.5)

    def test_one_class_validation(self):
        ds = make_ds([1, 1], [1, 0])
        sp = scored_of(ds, [0.5, 0.6])
        with pytest.raises(DegenerateDataError):
            tune_threshold(sp, ds)

    def test_bad_arguments(self):
        ds = make_ds([1, 0], [1, 0])
        sp = scored_of(ds, [0.5, 0.6])
        with pytest.raises(ArgumentError):
            tune_threshold(sp, ds, candidates=0)
        with pytest.raises(ArgumentError):
            tune_threshold(sp, ds, criterion="f1")


class TestSerialization:
    def test_round_trip_preserves_scores(self):
        ds = separable_toy()
        model = fit_logistic(ds)
        clone = LogisticModel.from_dict(model.to_dict())
        assert np.array_equal(
            predict_scores(model, ds).scores, predict_scores(clone, ds).scores
        )
        assert clone.digest() == model.digest()

    def test_rejects_foreign_document(self):
        with pytest.raises(ArgumentError):
            LogisticModel.from_dict({"version": 2, "kind": "logistic"})
        with pytest.raises(ArgumentError):
            LogisticModel.from_dict({"version": 1, "kind": "tree"})
