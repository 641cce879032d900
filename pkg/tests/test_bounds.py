import numpy as np
import pytest

from privlink import adversary, bounds, privacy, randmat
from privlink.errors import InfeasibleError, ParameterError
from privlink.privacy import PrivacyBudget


class TestServerMseBound:
    def test_square_exact_inversion(self):
        W = randmat.sample_encoder(6, 6, 0.5, seed=0)
        Dec = np.linalg.inv(W.entries)
        h, alpha = 0.8, 2.0
        beta = 1 / (alpha * h)
        sb = bounds.server_mse_bound(beta, h, alpha, Dec, W, 0.3, 0.7, 1.0)
        assert sb.approx_term == pytest.approx(0.0, abs=1e-16)
        dec_f2 = np.sum(Dec**2)
        expected = 0.3 * dec_f2 + 0.7 / (h**2 * alpha**2) * dec_f2
        assert sb.total == pytest.approx(expected, rel=1e-10)

    def test_projector_deficiency(self):
        W = randmat.sample_encoder(4, 12, 0.3, seed=1)
        Dec = randmat.pseudoinverse(W.entries)
        sb = bounds.server_mse_bound(1.0, 1.0, 1.0, Dec, W, 0.0, 0.0, 2.5)
        assert sb.approx_term == pytest.approx((12 - 4) * 2.5, rel=1e-8)

    def test_total_is_sum(self):
        W = randmat.sample_encoder(3, 7, 0.3, seed=2)
        Dec = randmat.pseudoinverse(W.entries)
        sb = bounds.server_mse_bound(0.5, 1.2, 2.0, Dec, W, 0.4, 0.9, 1.5)
        assert sb.total == sb.approx_term + sb.privacy_term + sb.channel_term

    def test_rescaling_invariance(self):
        # alpha -> c*alpha with beta -> beta/c: approx and privacy terms fixed,
        # channel term scales as 1/c^2
        W = randmat.sample_encoder(3, 7, 0.3, seed=3)
        Dec = randmat.pseudoinverse(W.entries)
        base = bounds.server_mse_bound(0.5, 1.2, 2.0, Dec, W, 0.4, 0.9, 1.5)
        for c in (0.5, 2.0):
            scaled = bounds.server_mse_bound(0.5 / c, 1.2, 2.0 * c, Dec, W, 0.4, 0.9, 1.5)
            assert scaled.approx_term == pytest.approx(base.approx_term, rel=1e-10)
            assert scaled.privacy_term == pytest.approx(base.privacy_term, rel=1e-10)
            assert scaled.channel_term == pytest.approx(base.channel_term / c**2, rel=1e-10)

    def test_monte_carlo_respects_bound(self):
        # a friendlier version of the acceptance check, one config
        from privlink.harness import ExperimentConfig, closed_forms, run_trials
        cfg = ExperimentConfig(d=30, r=5, b=0.1, epsilon=8.0, C_f=2.0, margin=0.6,
                               sigma_m2=0.5, trials=4000, master_seed=3)
        cf = closed_forms(cfg)
        ts = run_trials(cfg)
        assert ts.metrics["server_f_mse"].mean <= cf.server_bound.total


class TestAccuracyLowerBound:
    def test_zero_mse(self):
        assert bounds.accuracy_lower_bound(0.9, 0.0, 2.0).lower == 0.9

    def test_clamp(self):
        assert bounds.accuracy_lower_bound(0.9, 4.0, 2.0).lower == 0.0
        assert bounds.accuracy_lower_bound(0.9, 10.0, 2.0).lower == 0.0

    def test_reference(self):
        assert bounds.accuracy_lower_bound(0.9, 1.0, 2.0).lower == pytest.approx(0.675)

    def test_monotonicity(self):
        lower = [bounds.accuracy_lower_bound(0.9, m, 2.0).lower
                 for m in np.linspace(0, 5, 30)]
        assert all(a >= b for a, b in zip(lower, lower[1:]))
        by_margin = [bounds.accuracy_lower_bound(0.9, 1.0, m).lower
                     for m in np.linspace(0.5, 5, 30)]
        assert all(a <= b for a, b in zip(by_margin, by_margin[1:]))
        by_p0 = [bounds.accuracy_lower_bound(p, 1.0, 2.0).lower
                 for p in np.linspace(0, 1, 20)]
        assert all(a <= b for a, b in zip(by_p0, by_p0[1:]))

    def test_parameter_errors(self):
        with pytest.raises(ParameterError):
            bounds.accuracy_lower_bound(0.9, 1.0, 0.0)
        with pytest.raises(ParameterError):
            bounds.accuracy_lower_bound(1.5, 1.0, 1.0)


class TestOptimalDimExplicit:
    def test_reference(self):
        sol = bounds.optimal_dim_explicit(1.0, 1.0, 2.0, 0.11, 3.0)
        assert sol.r_star == 110
        assert sol.mode == "explicit"

    def test_floor_at_one(self):
        sol = bounds.optimal_dim_explicit(1.0, 1.0, 2.0, 10.0, 1e-9)
        assert sol.r_star == 1

    def test_infeasible(self):
        with pytest.raises(InfeasibleError):
            bounds.optimal_dim_explicit(1.0, 1.0, 2.0, 0.11, 4.0)
        with pytest.raises(InfeasibleError):
            bounds.optimal_dim_explicit(1.0, 1.0, 2.0, 0.11, 5.0)

    def test_minimality_by_scan(self):
        g, alpha, d_z, nu2, omega = 1.3, 0.7, 2.0, 0.11, 3.0
        sol = bounds.optimal_dim_explicit(g, alpha, d_z, nu2, omega)
        at = lambda r: adversary.minimax_bound(g, alpha, d_z, r, nu2).bound
        assert at(sol.r_star) >= omega
        if sol.r_star > 1:
            assert at(sol.r_star - 1) < omega


class TestOptimalDimConsistent:
    def test_minimality_with_recalibration(self):
        budget = PrivacyBudget(1.0, 1e-5)
        args = dict(b=0.01, C_f=2.0, d=50, g=1.0, alpha=1.0, sigma_a2=1.0)
        sol = bounds.optimal_dim_consistent(budget, omega=2.0, r_max=50, **args)
        assert sol.mode == "consistent"

        def floor(r):
            cal = privacy.calibrate(budget, r, 50, 0.01, 2.0)
            nu2 = adversary.effective_noise(1.0, 1.0, cal.sigma2, 1.0)
            return adversary.minimax_bound(1.0, 1.0, cal.d_z, r, nu2).bound

        assert floor(sol.r_star) >= 2.0
        for r in range(1, sol.r_star):
            assert floor(r) < 2.0

    def test_agreement_with_explicit_when_frozen(self):
        budget = PrivacyBudget(1.0, 1e-5)
        sol = bounds.optimal_dim_consistent(budget, 0.01, 2.0, 50, 1.0, 1.0, 1.0,
                                            omega=2.0, r_max=50)
        cal = privacy.calibrate(budget, sol.r_star, 50, 0.01, 2.0)
        nu2 = adversary.effective_noise(1.0, 1.0, cal.sigma2, 1.0)
        frozen = bounds.optimal_dim_explicit(1.0, 1.0, cal.d_z, nu2, 2.0)
        assert frozen.r_star == sol.r_star

    def test_infeasible(self):
        budget = PrivacyBudget(100.0, 1e-5)
        with pytest.raises(InfeasibleError):
            # huge epsilon: tiny sigma2, the floor cannot reach omega
            bounds.optimal_dim_consistent(budget, 0.01, 2.0, 50, 1.0, 1.0, 1e-6,
                                          omega=3.0, r_max=50)

    def test_noise_limited_saturation(self):
        # large sigma_a2: r* barely moves as epsilon spans a decade
        budget_lo, budget_hi = PrivacyBudget(0.5, 1e-5), PrivacyBudget(5.0, 1e-5)
        args = dict(b=0.01, C_f=2.0, d=50, g=1.0, alpha=1.0, sigma_a2=1e4)
        lo = bounds.optimal_dim_consistent(budget_lo, omega=1.0, r_max=50, **args)
        hi = bounds.optimal_dim_consistent(budget_hi, omega=1.0, r_max=50, **args)
        assert abs(lo.r_star - hi.r_star) <= 1

    def test_privacy_limited_shrinks_with_d(self):
        # small sigma_a2: growing d reduces (or keeps) the needed dimension
        budget = PrivacyBudget(1.0, 1e-5)
        r_small = bounds.optimal_dim_consistent(budget, 0.01, 2.0, 50, 1.0, 1.0,
                                                1e-4, omega=1.0, r_max=50).r_star
        r_large = bounds.optimal_dim_consistent(budget, 0.01, 2.0, 400, 1.0, 1.0,
                                                1e-4, omega=1.0, r_max=400).r_star
        assert r_large <= r_small
