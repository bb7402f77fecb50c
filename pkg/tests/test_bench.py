import json

import numpy as np
import pytest

from fairlab import (
    ArgumentError,
    CatalogError,
    DEFAULT_METRICS,
    ExperimentConfig,
    RunResult,
    SummaryTable,
    emit_report,
    run_experiment,
    run_pipeline,
    write_report_files,
)
from fairlab.bench import REPORT_FORMATS, resolve_groups

from conftest import group_pair, make_ds


def pipeline_dataset(seed=0, n=400):
    rng = np.random.default_rng(seed)
    groups = (rng.uniform(size=n) < 0.5).astype(float)
    x0 = rng.normal(size=n) + 0.9 * groups
    x1 = rng.normal(size=n)
    x2 = rng.normal(size=n)
    score = x0 + 0.6 * x1 + 0.5 * groups + 0.5 * rng.normal(size=n)
    labels = (score > np.median(score)).astype(float)
    feats = np.column_stack([x0, x1, x2])
    return make_ds(labels, groups, features=feats)


class TestConfig:
    def test_requires_exactly_one_source(self):
        with pytest.raises(ArgumentError):
            ExperimentConfig()
        with pytest.raises(ArgumentError):
            ExperimentConfig(dataset="adult", data_file="x.csv")

    def test_data_file_needs_spec(self):
        with pytest.raises(ArgumentError):
            ExperimentConfig(data_file="x.csv")

    def test_fraction_validation(self):
        with pytest.raises(ArgumentError):
            ExperimentConfig(dataset="adult", fractions=(0.5, 0.5))
        with pytest.raises(ArgumentError):
            ExperimentConfig(dataset="adult", fractions=(0.6, 0.3, 0.3))

    def test_repeats_and_metrics_validated(self):
        with pytest.raises(ArgumentError):
            ExperimentConfig(dataset="adult", repeats=0)
        with pytest.raises(ArgumentError):
            ExperimentConfig(dataset="adult", metrics=())

    def test_from_dict_rejects_unknown_fields(self):
        with pytest.raises(ArgumentError, match="bootstrap"):
            ExperimentConfig.from_dict({"dataset": "adult", "bootstrap": True})

    def test_round_trip_and_digest(self):
        cfg = ExperimentConfig(
            dataset="german", algorithm="reweighing", repeats=3, seed=7
        )
        again = ExperimentConfig.from_dict(cfg.to_dict())
        assert again == cfg
        assert again.digest() == cfg.digest()
        assert len(cfg.digest()) == 12
        assert all(c in "0123456789abcdef" for c in cfg.digest())


class TestRunPipeline:
    def test_baseline_only(self):
        ds = pipeline_dataset()
        priv, unpriv = group_pair()
        result = run_pipeline(ds, priv, unpriv, seed=1)
        assert result.pred_after is None
        assert result.metrics_after is None
        assert result.threshold_after is None
        assert set(result.metrics_before) == set(DEFAULT_METRICS)
        assert 0.0 < result.threshold_before < 1.0
        assert 0.5 < result.balanced_accuracy_before <= 1.0

    @pytest.mark.parametrize(
        "algorithm,params",
        [
            ("reweighing", {}),
            ("disparate_impact_remover", {"repair_level": 1.0}),
            ("lfr", {"k": 4, "max_iter": 150}),
            ("prejudice_remover", {"eta": 5.0, "max_iter": 400}),
            ("eq_odds", {}),
            ("calibrated_eq_odds", {}),
            ("reject_option", {"epsilon": 0.1}),
        ],
    )
    def test_each_algorithm_family_runs(self, algorithm, params):
        ds = pipeline_dataset()
        priv, unpriv = group_pair()
        result = run_pipeline(
            ds, priv, unpriv, algorithm=algorithm, params=params, seed=2
        )
        assert result.pred_after is not None
        assert result.threshold_after is not None
        assert result.algorithm_state["algorithm"] == algorithm
        assert set(result.metrics_after) == set(DEFAULT_METRICS)
        assert np.isfinite(result.balanced_accuracy_after)

    def test_seeded_splits_reproduce(self):
        ds = pipeline_dataset()
        priv, unpriv = group_pair()
        a = run_pipeline(ds, priv, unpriv, algorithm="reweighing", seed=5)
        b = run_pipeline(ds, priv, unpriv, algorithm="reweighing", seed=5)
        c = run_pipeline(ds, priv, unpriv, algorithm="reweighing", seed=6)
        assert a.metrics_before == b.metrics_before
        assert a.metrics_after == b.metrics_after
        assert a.metrics_before != c.metrics_before


class TestRunExperiment:
    def test_unknown_names_rejected_up_front(self):
        ds = pipeline_dataset()
        cfg = ExperimentConfig(dataset="german", metrics=("nope",), repeats=1)
        with pytest.raises(CatalogError):
            run_experiment(cfg, dataset=ds)
        cfg = ExperimentConfig(dataset="german", algorithm="nope", repeats=1)
        with pytest.raises(CatalogError):
            run_experiment(cfg, dataset=ds)

    def test_preset_needs_data_dir(self):
        cfg = ExperimentConfig(dataset="german", repeats=1)
        with pytest.raises(ArgumentError, match="data directory"):
            run_experiment(cfg)

    def test_split_failures_recorded_not_fatal(self):
        # 3 positives in 40 rows: many seeded splits lose the favorable class
        rng = np.random.default_rng(0)
        labels = np.zeros(40)
        labels[[0, 1, 2]] = 1.0
        groups = rng.integers(0, 2, 40).astype(float)
        groups[:2] = [1.0, 0.0]
        ds = make_ds(labels, groups)
        cfg = ExperimentConfig(
            dataset="german",
            metrics=("statistical_parity_difference",),
            repeats=12,
            seed=0,
        )
        summary = run_experiment(cfg, dataset=ds)
        assert len(summary.runs) + len(summary.failures) == 12
        assert summary.failures, "expected at least one degenerate split"
        record = summary.failures[0]
        assert set(record) == {"split", "seed", "error", "message"}

    def test_reruns_are_byte_identical(self):
        ds = pipeline_dataset()
        cfg = ExperimentConfig(
            dataset="german", algorithm="reweighing", repeats=3, seed=1
        )
        one = run_experiment(cfg, dataset=ds)
        two = run_experiment(cfg, dataset=ds)
        for fmt in REPORT_FORMATS:
            assert emit_report(one, fmt) == emit_report(two, fmt)


class TestSummaryTable:
    @staticmethod
    def run_of(split, spd, bal):
        return RunResult(
            split=split,
            seed=split,
            threshold_before=0.5,
            threshold_after=None,
            metrics_before={"statistical_parity_difference": spd},
            metrics_after=None,
            balanced_accuracy_before=bal,
            balanced_accuracy_after=None,
            timings={},
        )

    def config(self, repeats=3):
        return ExperimentConfig(
            dataset="german",
            metrics=("statistical_parity_difference",),
            repeats=repeats,
        )

    def test_aggregate_uses_sample_std(self):
        runs = [self.run_of(i, v, 0.7) for i, v in enumerate((-0.1, -0.2, -0.3))]
        agg = SummaryTable(self.config(), runs, []).aggregate()
        cell = agg["statistical_parity_difference"]["before"]
        assert cell["mean"] == pytest.approx(-0.2)
        assert cell["std"] == pytest.approx(0.1)  # ddof=1
        assert cell["n"] == 3
        assert agg["balanced_accuracy"]["before"]["std"] == pytest.approx(0.0, abs=1e-12)

    def test_single_run_std_is_zero(self):
        agg = SummaryTable(self.config(1), [self.run_of(0, -0.15, 0.7)], []).aggregate()
        assert agg["statistical_parity_difference"]["before"]["std"] == 0.0

    def test_zero_runs_rejected(self):
        table = SummaryTable(self.config(), [], [{"split": 0}])
        with pytest.raises(ArgumentError, match="no successful"):
            table.aggregate()

    def test_runs_type_checked(self):
        with pytest.raises(ArgumentError):
            SummaryTable(self.config(), [{"split": 0}], [])


class TestReports:
    def summary(self):
        ds = pipeline_dataset()
        cfg = ExperimentConfig(
            dataset="german",
            algorithm="reweighing",
            metrics=("statistical_parity_difference", "disparate_impact"),
            repeats=2,
            seed=3,
        )
        return run_experiment(cfg, dataset=ds)

    def test_csv_round_trips_floats_exactly(self):
        summary = self.summary()
        text = emit_report(summary, "csv").decode()
        lines = text.strip().splitlines()
        assert lines[0] == "metric,phase,mean,std,n"
        agg = summary.aggregate()
        for line in lines[1:]:
            name, phase, mean, std, n = line.split(",")
            cell = agg[name][phase]
            assert float(mean) == cell["mean"]
            assert float(std) == cell["std"]
            assert int(n) == cell["n"]

    def test_json_report_shape(self):
        summary = self.summary()
        doc = json.loads(emit_report(summary, "json"))
        assert set(doc) == {"config", "config_digest", "aggregate", "failures", "runs"}
        assert doc["config_digest"] == summary.config.digest()
        assert len(doc["runs"]) == len(summary.runs)
        assert "timings" not in doc["runs"][0]

    def test_plotdata_carries_ideals_and_points(self):
        summary = self.summary()
        doc = json.loads(emit_report(summary, "plotdata"))
        by_id = {m["metric_id"]: m for m in doc["metrics"]}
        assert by_id["disparate_impact"]["ideal"] == 1.0
        assert by_id["statistical_parity_difference"]["ideal"] == 0.0
        assert len(by_id["disparate_impact"]["points"]) == len(summary.runs)
        point = by_id["disparate_impact"]["points"][0]
        assert point["after"] is not None

    def test_unknown_format(self):
        summary = self.summary()
        with pytest.raises(ArgumentError, match="csv"):
            emit_report(summary, "yaml")

    def test_write_report_files_names(self, tmp_path):
        summary = self.summary()
        paths = write_report_files(summary, tmp_path)
        digest = summary.config.digest()
        assert [p.name for p in paths] == [
            f"bench_{digest}.csv",
            f"bench_{digest}.json",
            f"bench_{digest}.plotdata.json",
        ]
        for p in paths:
            assert p.read_bytes()


class TestResolveGroups:
    def test_explicit_values(self):
        ds = pipeline_dataset()
        cfg = ExperimentConfig(
            dataset="german", protected="g", privileged=(1.0,), unprivileged=(0.0,)
        )
        priv, unpriv = resolve_groups(ds, cfg)
        assert priv.mask(ds).sum() + unpriv.mask(ds).sum() == ds.n_instances

    def test_half_pair_rejected(self):
        ds = pipeline_dataset()
        cfg = ExperimentConfig(dataset="german", protected="g", privileged=(1.0,))
        with pytest.raises(ArgumentError, match="pair"):
            resolve_groups(ds, cfg)

    def test_unknown_protected_attribute(self):
        ds = pipeline_dataset()
        cfg = ExperimentConfig(dataset="german", protected="species")
        with pytest.raises(CatalogError):
            resolve_groups(ds, cfg)

    def test_values_without_protected_rejected(self):
        ds = pipeline_dataset()
        cfg = ExperimentConfig(
            dataset="german", privileged=(1.0,), unprivileged=(0.0,)
        )
        with pytest.raises(ArgumentError, match="protected"):
            resolve_groups(ds, cfg)
