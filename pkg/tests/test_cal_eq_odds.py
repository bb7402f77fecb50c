import numpy as np
import pytest

from fairlab import ArgumentError, CalibratedEqOdds, DegenerateDataError

from conftest import group_pair, make_ds, scored_of


def hand_pair():
    # privileged: gfnr = mean(0.2, 0.4) = 0.3, gfpr = mean(0.2, 0.4) = 0.3
    # unprivileged: gfnr = mean(0.1, 0.3) = 0.2, gfpr = mean(0.1, 0.1) = 0.1
    groups = [1, 1, 1, 1, 0, 0, 0, 0]
    labels = [1, 1, 0, 0, 1, 1, 0, 0]
    scores = [0.8, 0.6, 0.2, 0.4, 0.9, 0.7, 0.1, 0.1]
    ds = make_ds(labels, groups)
    return ds, scored_of(ds, scores)


class TestFit:
    def test_hand_alpha_weighted_cost(self):
        ds, sp = hand_pair()
        priv, unpriv = group_pair()
        algo = CalibratedEqOdds(priv, unpriv, cost="weighted").fit(ds, sp)
        # costs 0.3 vs 0.15; mixing toward the trivial 0.5 needs
        # alpha = (0.3 - 0.15) / (0.5 - 0.15) = 3/7
        assert algo.costs_["privileged"] == pytest.approx(0.3)
        assert algo.costs_["unprivileged"] == pytest.approx(0.15)
        assert algo.alpha_["privileged"] == 0.0
        assert algo.alpha_["unprivileged"] == pytest.approx(3 / 7)

    def test_expected_costs_equalize(self):
        ds, sp = hand_pair()
        priv, unpriv = group_pair()
        for cost in ("weighted", "gfnr", "gfpr"):
            algo = CalibratedEqOdds(priv, unpriv, cost=cost).fit(ds, sp)
            after = algo.expected_costs()
            assert after["privileged"] == pytest.approx(
                after["unprivileged"], abs=1e-6
            )

    def test_equal_costs_leave_scores_alone(self):
        groups = [1, 1, 1, 1, 0, 0, 0, 0]
        labels = [1, 1, 0, 0, 1, 1, 0, 0]
        scores = [0.8, 0.6, 0.2, 0.4, 0.8, 0.6, 0.2, 0.4]
        ds = make_ds(labels, groups)
        sp = scored_of(ds, scores)
        priv, unpriv = group_pair()
        algo = CalibratedEqOdds(priv, unpriv).fit(ds, sp)
        assert algo.alpha_ == {"privileged": 0.0, "unprivileged": 0.0}
        out = algo.apply(sp, seed=11)
        assert np.array_equal(out.scores, sp.scores)

    def test_gap_zero_is_degenerate(self):
        # low-cost group sits exactly at the trivial weighted cost 0.5, so
        # no mixing rate can move it
        groups = [1, 1, 1, 1, 0, 0, 0, 0]
        labels = [1, 1, 0, 0, 1, 1, 0, 0]
        scores = [0.5, 0.5, 0.5, 0.5, 0.1, 0.1, 0.9, 0.9]
        ds = make_ds(labels, groups)
        sp = scored_of(ds, scores)
        priv, unpriv = group_pair()
        with pytest.raises(DegenerateDataError, match="trivial"):
            CalibratedEqOdds(priv, unpriv).fit(ds, sp)

    def test_group_without_positives_rejected(self):
        groups = [1, 1, 1, 1, 0, 0, 0, 0]
        labels = [1, 1, 0, 0, 0, 0, 0, 0]
        ds = make_ds(labels, groups)
        sp = scored_of(ds, [0.5] * 8)
        priv, unpriv = group_pair()
        with pytest.raises(DegenerateDataError, match="no positives"):
            CalibratedEqOdds(priv, unpriv, cost="gfnr").fit(ds, sp)

    def test_unknown_cost_rejected(self):
        priv, unpriv = group_pair()
        with pytest.raises(ArgumentError, match="cost"):
            CalibratedEqOdds(priv, unpriv, cost="accuracy")


class TestApply:
    def test_seeded_deterministic(self):
        ds, sp = hand_pair()
        priv, unpriv = group_pair()
        algo = CalibratedEqOdds(priv, unpriv).fit(ds, sp)
        a = algo.apply(sp, seed=1)
        b = algo.apply(sp, seed=1)
        assert np.array_equal(a.scores, b.scores)

    def test_replaced_scores_take_group_base_rate(self):
        ds, sp = hand_pair()
        priv, unpriv = group_pair()
        algo = CalibratedEqOdds(priv, unpriv).fit(ds, sp)
        out = algo.apply(sp, seed=2)
        changed = out.scores != sp.scores
        umask = unpriv.mask(ds)
        assert changed[~umask].sum() == 0  # only the mixed group moves
        assert set(out.scores[changed & umask]) <= {algo.base_rates_["unprivileged"]}

    def test_monte_carlo_share_and_cost(self):
        rng = np.random.default_rng(8)
        n = 20_000
        groups = (np.arange(n) % 2 == 0).astype(float)
        labels = (rng.uniform(size=n) < 0.5).astype(float)
        labels[:2] = [1.0, 0.0]
        scores = np.clip(
            0.5 + (labels - 0.5) * (0.5 - 0.25 * groups) + 0.05 * rng.normal(size=n),
            0.01,
            0.99,
        )
        ds = make_ds(labels, groups)
        sp = scored_of(ds, scores)
        priv, unpriv = group_pair()
        algo = CalibratedEqOdds(priv, unpriv).fit(ds, sp)
        low = "privileged" if algo.alpha_["privileged"] > 0 else "unprivileged"
        assert 0.0 < algo.alpha_[low] < 1.0
        out = algo.apply(sp, seed=3)
        mask = (priv if low == "privileged" else unpriv).mask(ds)
        share = (out.scores[mask] != sp.scores[mask]).mean()
        assert share == pytest.approx(algo.alpha_[low], abs=0.02)

        # empirical post-mix cost matches the closed form
        y = ds.binary_labels()
        for name, spec in (("privileged", priv), ("unprivileged", unpriv)):
            m = spec.mask(ds)
            pos = m & (y == 1.0)
            neg = m & (y == 0.0)
            gfnr = (1.0 - out.scores[pos]).mean()
            gfpr = out.scores[neg].mean()
            assert 0.5 * (gfnr + gfpr) == pytest.approx(
                algo.expected_costs()[name], abs=0.02
            )

    def test_state_dict(self):
        ds, sp = hand_pair()
        priv, unpriv = group_pair()
        algo = CalibratedEqOdds(priv, unpriv).fit(ds, sp)
        state = algo.state_dict()
        assert state["version"] == 1
        assert state["algorithm"] == "calibrated_eq_odds"
        assert state["cost"] == "weighted"
        assert state["alpha"]["unprivileged"] == pytest.approx(3 / 7)
