import dataclasses
import math

import numpy as np
import pytest

from privlink import bounds, harness
from privlink.errors import DimensionError, ParameterError
from privlink.harness import ExperimentConfig


def cfg(**kw):
    return dataclasses.replace(ExperimentConfig(), **kw)


class TestConfig:
    def test_defaults_valid(self):
        ExperimentConfig().validate()

    @pytest.mark.parametrize("key,val", [
        ("epsilon", 0.0), ("epsilon", -1.0), ("delta", 0.0), ("delta", 1.0),
        ("b", 0.0), ("C_f", -2.0), ("margin", 0.0), ("sigma_m2", -1.0),
        ("sigma_a2", -0.5), ("sigma_w2", -0.1), ("p_flip", 0.5), ("p_flip", -0.1),
        ("trials", 0), ("omega", 0.0), ("M", 0), ("h", 0.0),
        ("decoder", "ridge"), ("beta_mode", "oracle"),
    ])
    def test_invalid_named(self, key, val):
        with pytest.raises(ParameterError) as exc:
            cfg(**{key: val}).validate()
        assert key in str(exc.value)

    def test_r_range(self):
        with pytest.raises(ParameterError):
            cfg(r=0).validate()
        with pytest.raises(ParameterError):
            cfg(r=51, d=50).validate()

    def test_acquisition_dims(self):
        cfg(m_dim=64, d=50).validate()
        with pytest.raises(ParameterError):
            cfg(m_dim=32, d=50).validate()

    def test_alpha_sources(self):
        assert cfg().resolved_alpha() == 1.0
        assert cfg(alpha=2.5).resolved_alpha() == 2.5
        assert cfg(P_dbm=30.0).resolved_alpha() == pytest.approx(
            math.sqrt(1000.0), rel=1e-12)
        with pytest.raises(ParameterError):
            cfg(alpha=1.0, P_dbm=30.0).resolved_alpha()


class TestSummarize:
    def test_against_numpy(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=200)
        m = harness.summarize(x)
        assert m.mean == pytest.approx(np.mean(x), rel=1e-12)
        assert m.variance == pytest.approx(np.var(x, ddof=1), rel=1e-12)
        half = 1.96 * math.sqrt(np.var(x, ddof=1) / 200)
        assert m.ci95_halfwidth == pytest.approx(half, rel=1e-9)

    def test_order_independent_exactly(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=501) * 10.0**rng.integers(-8, 8, size=501)
        a = harness.summarize(x)
        b = harness.summarize(x[rng.permutation(501)])
        assert a == b  # bitwise, thanks to compensated summation

    def test_small_sample_no_ci(self):
        m = harness.summarize([1.0, 2.0, 3.0])
        assert math.isnan(m.ci95_low) and math.isnan(m.ci95_high)
        assert m.mean == 2.0

    def test_single_value(self):
        m = harness.summarize([4.0])
        assert m.mean == 4.0 and m.variance == 0.0

    def test_empty(self):
        with pytest.raises(ParameterError):
            harness.summarize([])


class TestMarginTask:
    def setup_method(self):
        self.task = harness.synth_margin_task(20, 0.8, 0.1, seed=3, C_f=2.0)

    def test_axis_unit(self):
        assert np.linalg.norm(self.task.axis) == pytest.approx(1.0, rel=1e-12)

    def test_samples_on_margin_and_inside_ball(self):
        F, _ = self.task.sample(500, np.random.default_rng(0))
        proj = F @ self.task.axis
        np.testing.assert_allclose(np.abs(proj), 0.8, rtol=1e-10)
        assert np.all(np.linalg.norm(F, axis=1) <= 2.0 + 1e-9)

    def test_classifier_matches_true_label(self):
        F, _ = self.task.sample(500, np.random.default_rng(1))
        true = np.sign(F @ self.task.axis)
        np.testing.assert_array_equal(self.task.classify(F), true)

    def test_flip_rate(self):
        F, labels = self.task.sample(20_000, np.random.default_rng(2))
        flips = np.mean(self.task.classify(F) != labels)
        assert abs(flips - 0.1) < 0.01

    def test_margin_is_tight(self):
        # moving 2*margin against the axis flips the decision; anything
        # strictly inside the margin cannot
        F, _ = self.task.sample(100, np.random.default_rng(3))
        true = self.task.classify(F)
        moved = F - np.outer(true * 2 * 0.8, self.task.axis)
        np.testing.assert_array_equal(self.task.classify(moved), -true)
        nudged = F - np.outer(true * 0.99 * 0.8, self.task.axis)
        np.testing.assert_array_equal(self.task.classify(nudged), true)

    def test_invalid_params(self):
        with pytest.raises(ParameterError):
            harness.synth_margin_task(5, 0.0, 0.1, seed=0)
        with pytest.raises(ParameterError):
            harness.synth_margin_task(5, 1.0, 0.7, seed=0)


class TestClosedForms:
    def test_reference_values(self):
        cf = harness.closed_forms(cfg())
        assert cf.sigma2 == pytest.approx(173.35316538858228, rel=1e-12)
        assert cf.d_z == pytest.approx(1.7951534494051227, rel=1e-12)
        assert cf.nu2 == pytest.approx(cf.sigma2 + 1.0, rel=1e-12)
        assert cf.bound_adv == pytest.approx(3.2166305968619477, rel=1e-9)
        assert cf.gamma_star == pytest.approx(0.0018448937188453203, rel=1e-9)

    def test_harmonic_identity(self):
        cf = harness.closed_forms(cfg(epsilon=2.0, r=8, alpha=1.5, g=0.7))
        lhs = 1.0 / cf.bound_adv
        rhs = 1.0 / cf.d_z**2 + (0.7 * 1.5)**2 / (8 * cf.nu2)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_server_bound_terms(self):
        cf = harness.closed_forms(cfg())
        sb = cf.server_bound
        assert sb.approx_term == pytest.approx((50 - 10) * 4.0, rel=1e-8)
        assert sb.total == pytest.approx(
            sb.approx_term + sb.privacy_term + sb.channel_term, rel=1e-12)


class TestRunTrials:
    def test_deterministic(self):
        c = cfg(trials=200)
        assert harness.run_trials(c) == harness.run_trials(c)

    def test_seed_changes_results(self):
        a = harness.run_trials(cfg(trials=200))
        b = harness.run_trials(cfg(trials=200, master_seed=1))
        assert a.metrics["server_f_mse"].mean != b.metrics["server_f_mse"].mean

    def test_metric_names(self):
        ts = harness.run_trials(cfg(trials=50))
        assert set(ts.metrics) == {"server_z_mse", "server_f_mse", "adv_z_mse",
                                   "adv_f_mse", "accuracy"}
        ts2 = harness.run_trials(cfg(trials=50, m_dim=64))
        assert "raw_mse" in ts2.metrics

    def test_zero_noise_square_encoder_recovers_features(self):
        # huge epsilon drives sigma2 to ~0; r = d makes the decoder exact
        c = cfg(d=12, r=12, epsilon=1e9, sigma_m2=0.0, trials=100)
        ts = harness.run_trials(c)
        assert ts.metrics["server_f_mse"].mean < 1e-9
        assert ts.metrics["accuracy"].mean == pytest.approx(1 - 0.05, abs=0.05)

    def test_near_clean_accuracy_matches_label_noise(self):
        c = cfg(d=12, r=12, epsilon=1e9, sigma_m2=0.0, p_flip=0.2, trials=20_000)
        acc = harness.run_trials(c).metrics["accuracy"].mean
        assert acc == pytest.approx(0.8, abs=0.01)

    def test_saddle_mse_matches_bound(self):
        c = cfg(trials=20_000)
        cf = harness.closed_forms(c)
        m = harness.run_trials(c).metrics["adv_z_mse"]
        assert m.mean == pytest.approx(cf.bound_adv, rel=0.03)

    def test_server_z_mse_matches_theory(self):
        c = cfg(trials=20_000, alpha=2.0, h=0.5, sigma_m2=0.3)
        cf = harness.closed_forms(c)
        expected = c.r * (cf.sigma2 + 0.3 / (2.0 * 0.5)**2)
        m = harness.run_trials(c).metrics["server_z_mse"]
        assert m.mean == pytest.approx(expected, rel=0.03)

    def test_lifted_acquisition_is_isometric(self):
        # with noiseless lifted inputs the raw-domain adversary error equals
        # the feature-domain error exactly
        ts = harness.run_trials(cfg(m_dim=64, sigma_w2=0.0, trials=100))
        assert ts.metrics["raw_mse"].mean == pytest.approx(
            ts.metrics["adv_f_mse"].mean, rel=1e-10)

    def test_task_dim_mismatch(self):
        task = harness.synth_margin_task(10, 1.0, 0.05, seed=0, C_f=2.0)
        with pytest.raises(DimensionError):
            harness.run_trials(cfg(trials=10), task=task)

    def test_perturbed_beta_increases_error(self):
        base = cfg(trials=5000)
        pert = cfg(trials=5000, beta_mode="perturbed", csi_error=0.2)
        a = harness.run_trials(base).metrics["server_f_mse"].mean
        b = harness.run_trials(pert).metrics["server_f_mse"].mean
        assert b > a


class TestSweep:
    def test_epsilon_sweep_monotone(self):
        res = harness.sweep(cfg(trials=200), "epsilon", [0.1, 0.5, 1, 2, 5, 10])
        sig = [row.sigma2 for row in res.rows]
        adv = [row.bound_adv for row in res.rows]
        assert all(a > b for a, b in zip(sig, sig[1:]))
        assert all(a > b for a, b in zip(adv, adv[1:]))

    def test_r_sweep_sigma_monotone(self):
        # sigma2 ~ c_w(r)^2 (r+d); the dimension factor dominates once r is
        # not tiny relative to d, giving a rising noise requirement
        res = harness.sweep(cfg(trials=50), "r", [10, 20, 30, 40])
        sig = [row.sigma2 for row in res.rows]
        assert all(a < b for a, b in zip(sig, sig[1:]))

    def test_m_sweep_bound_approaches_r(self):
        res = harness.sweep(cfg(trials=50), "M", [1, 10, 100, 10_000, 1_000_000])
        mb = [row.bound_mimo for row in res.rows]
        assert all(a < b for a, b in zip(mb, mb[1:]))
        assert mb[-1] == pytest.approx(10.0, rel=0.01)

    def test_rows_reproduce_closed_forms(self):
        res = harness.sweep(cfg(trials=50), "epsilon", [0.5, 2.0])
        for v, row in zip(res.values, res.rows):
            cf = harness.closed_forms(cfg(trials=50, epsilon=v))
            assert row.sigma2 == cf.sigma2
            assert row.bound_adv == cf.bound_adv
            assert row.bound_server == cf.server_bound.total

    def test_mse_source_empirical(self):
        res = harness.sweep(cfg(trials=500), "epsilon", [1.0],
                            mse_source="empirical")
        row = res.rows[0]
        ab = bounds.accuracy_lower_bound(0.95, row.mse_server_emp, 1.0)
        assert row.acc_bound == ab.lower

    def test_bad_axis_and_values(self):
        with pytest.raises(ParameterError):
            harness.sweep(cfg(), "sigma2", [1.0])
        with pytest.raises(ParameterError):
            harness.sweep(cfg(), "epsilon", [])
        with pytest.raises(ParameterError) as exc:
            harness.sweep(cfg(), "r", [2.5])
        assert "2.5" in str(exc.value)
        with pytest.raises(ParameterError) as exc:
            harness.sweep(cfg(), "epsilon", [1.0, -3.0])
        assert "-3.0" in str(exc.value)
        with pytest.raises(ParameterError):
            harness.sweep(cfg(), "epsilon", [1.0], mse_source="median")

    def test_deterministic(self):
        a = harness.sweep(cfg(trials=100), "epsilon", [0.5, 1.0])
        b = harness.sweep(cfg(trials=100), "epsilon", [0.5, 1.0])
        assert a.rows == b.rows
