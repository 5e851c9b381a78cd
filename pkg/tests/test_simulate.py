import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import ndtri

from quantavg.simulate import (ERROR_LAWS, MonteCarloResult, ReplicationResult,
                               SimulationSpec, _ex2_components,
                               example3_quantile, generate_example1,
                               generate_example2, generate_example3,
                               mean_estimation_error, run_monte_carlo,
                               sample_error, selection_metrics, true_support)
from quantavg.solver import WeightVector


class TestSpec:
    def test_p_rule(self):
        assert SimulationSpec(1, 400).p == 20
        assert SimulationSpec(2, 800).p == 28
        assert SimulationSpec(3, 200).p == 14

    def test_validation(self):
        with pytest.raises(ValueError):
            SimulationSpec(4, 400)
        with pytest.raises(ValueError):
            SimulationSpec(1, 400, error="XX")
        with pytest.raises(ValueError):
            SimulationSpec(1, 400, tau=1.2)
        with pytest.raises(ValueError):
            SimulationSpec(1, 400, replications=0)

    def test_true_support(self):
        assert true_support(1, 20) == (0, 1, 2, 3)
        assert true_support(2, 16) == (0, 1, 2, 3)
        assert true_support(3, 28) == (0, 1, 2, 3, 4)
        with pytest.raises(ValueError):
            true_support(3, 4)


class TestExample1:
    def test_component_centering_by_quadrature(self):
        # each nonlinear component integrates to zero over U(-2.5, 2.5)
        m2 = quad(lambda u: (u * u - 25 / 12) / 5.0, -2.5, 2.5)[0]
        assert m2 == pytest.approx(0.0, abs=1e-10)
        m4 = quad(lambda u: (np.exp(-u) - 0.4 * math.sinh(2.5)) / 5.0,
                  -2.5, 2.5)[0]
        assert m4 == pytest.approx(0.0, abs=1e-10)
        # the exp centering constant is exactly (2/5)*sinh(5/2)
        assert (math.exp(2.5) - math.exp(-2.5)) / 5.0 == pytest.approx(
            0.4 * math.sinh(2.5), rel=1e-14)

    def test_covariate_moments(self):
        data = generate_example1(100_000, 4, "SN", 1)
        assert abs(data.X.mean()) < 0.01 * math.sqrt(25 / 12)
        assert data.X.var() == pytest.approx(25 / 12, rel=0.01)
        assert data.X.min() >= -2.5 and data.X.max() <= 2.5

    def test_deterministic(self):
        a = generate_example1(50, 5, "T3", 9)
        b = generate_example1(50, 5, "T3", 9)
        assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)


class TestExample2:
    def test_component_values(self):
        # at u = 0.25 the ratio component is sin(pi/2)/(2 - sin(pi/2)) = 1
        base = _ex2_components(np.array([[0.0, 0.0, 0.0, 0.0]]))[0]
        bumped = _ex2_components(np.array([[0.0, 0.0, 0.25, 0.0]]))[0]
        assert bumped - base == pytest.approx(2.0 * 1.0, abs=1e-12)

    def test_uncorrelated_at_t_zero(self):
        data = generate_example2(10_000, 6, "SN", 0.0, 3)
        corr = np.corrcoef(data.X.T)
        off = corr[np.triu_indices(6, 1)]
        assert np.max(np.abs(off)) < 0.05

    def test_common_factor_correlation(self):
        data = generate_example2(10_000, 6, "SN", 1.0, 4)
        corr = np.corrcoef(data.X.T)
        off = corr[np.triu_indices(6, 1)]
        assert np.allclose(off, 0.5, atol=0.03)

    def test_noise_scaling(self):
        a = generate_example2(5000, 4, "SN", 1.0, 5)
        resid = a.y - _ex2_components(a.X)
        assert resid.var() == pytest.approx(1.74, rel=0.1)


class TestExample3:
    def test_transform_increasing_in_u(self):
        u = np.linspace(0.001, 0.999, 400)
        for x5 in (0.0, 0.3, 1.0):
            vals = (1 + x5) * ndtri(u) - x5 * np.log(1 - u)
            assert np.all(np.diff(vals) > 0)

    def test_conditional_quantiles_match_handle(self):
        # rebuild the comonotone construction at a pinned covariate row and
        # compare its empirical quantiles with the closed-form handle
        rng = np.random.default_rng(8)
        x = np.array([[0.3, 0.7, 0.5, 0.62, 0.25]])
        base = (1.0 + 2 * x[0, 0] + 3 * x[0, 1] ** 2
                - np.log(1 - x[0, 2]) + ndtri(x[0, 3]) + x[0, 4])
        u = rng.uniform(0, 1, 100_000)
        y = base + (1 + x[0, 4]) * ndtri(u) - x[0, 4] * np.log(1 - u)
        for tau in (0.25, 0.5, 0.75):
            expect = example3_quantile(x, tau)[0]
            assert np.quantile(y, tau) == pytest.approx(expect, abs=0.02)

    def test_handle_special_point(self):
        x = np.array([[0.0, 0.0, 0.0, 0.5, 0.0]])
        assert example3_quantile(x, 0.5)[0] == pytest.approx(1.0, abs=1e-12)

    def test_generated_sample_against_handle(self):
        data, handle = generate_example3(200_000, 5, 12)
        # unconditional check: P(Y <= Q_tau(Y|X)) should be about tau
        for tau in (0.25, 0.5, 0.75):
            cover = np.mean(data.y <= handle(data.X, tau))
            assert cover == pytest.approx(tau, abs=0.01)


class TestErrors:
    def test_sn_moments(self):
        e = sample_error("SN", 100_000, 3)
        assert abs(e.mean()) < 0.02
        assert abs(e.std() - 1.0) < 0.02

    def test_mn_variance(self):
        e = sample_error("MN", 100_000, 4)
        assert e.var() == pytest.approx(5.95, rel=0.05)

    def test_t3_shape(self):
        e = sample_error("T3", 100_000, 5)
        assert abs(np.median(e)) < 0.02
        sn = sample_error("SN", 100_000, 5)
        kurt = lambda v: np.mean((v - v.mean()) ** 4) / v.var() ** 2
        assert kurt(e) > 2 * kurt(sn)

    def test_unknown_law(self):
        with pytest.raises(ValueError):
            sample_error("CAUCHY", 10, 0)


class TestSelectionMetrics:
    def test_oracle_weights(self):
        w = WeightVector(0.0, np.array([1.0, 0.5, 0.0, 0.0]))
        c, ic, cf = selection_metrics(w, (0, 1), 4)
        assert (c, ic, cf) == (2, 0, True)

    def test_all_zero_weights(self):
        w = WeightVector(0.3, np.zeros(6))
        c, ic, cf = selection_metrics(w, (0, 1), 6)
        assert (c, ic, cf) == (4, 2, False)

    def test_bounds(self, rng):
        for _ in range(50):
            p = int(rng.integers(3, 12))
            s = int(rng.integers(1, p))
            truth = tuple(rng.choice(p, s, replace=False))
            w = WeightVector(0.0, rng.normal(0, 1, p) * rng.integers(0, 2, p))
            c, ic, cf = selection_metrics(w, truth, p)
            assert 0 <= c <= p - s
            assert 0 <= ic <= s
            assert cf == (c == p - s and ic == 0)

    def test_rejects_bad_truth(self):
        with pytest.raises(ValueError):
            selection_metrics(WeightVector(0, np.zeros(3)), (5,), 3)


class TestMee:
    def test_examples(self):
        assert mean_estimation_error([1.0, 2.0], [1.0, 2.0]) == 0.0
        assert mean_estimation_error([1.0, 2.0], [1.5, 2.5]) == pytest.approx(0.25)
        with pytest.raises(ValueError):
            mean_estimation_error([], [])


class TestMonteCarlo:
    def test_smoke_two_replications(self):
        spec = SimulationSpec(1, 100, n_te=40, replications=2, seed=6)
        res = run_monte_carlo(spec, ("PSMAQP",))
        rows = res.summary()
        assert len(rows) == 1
        for key in ("c", "ic", "cf", "mpe_in", "mpe_out"):
            mean, sd = rows[0][key]
            assert np.isfinite(mean) and np.isfinite(sd)
        assert rows[0]["mee_in"] is None

    def test_reproducible_across_job_counts(self):
        spec = SimulationSpec(1, 100, n_te=30, replications=3, seed=7)
        a = run_monte_carlo(spec, ("PSMAQP",), n_jobs=1)
        b = run_monte_carlo(spec, ("PSMAQP",), n_jobs=2)
        assert a.summary() == b.summary()

    def test_example3_reports_mee(self):
        spec = SimulationSpec(3, 100, n_te=30, replications=2, seed=8)
        res = run_monte_carlo(spec, ("PSMAQP",))
        row = res.summary()[0]
        assert row["mee_in"] is not None and row["mee_out"] is not None

    def test_unpenalized_has_no_selection_metrics(self):
        spec = SimulationSpec(1, 100, n_te=30, replications=2, seed=9)
        res = run_monte_carlo(spec, ("SMAQP",))
        row = res.summary()[0]
        assert row["c"] is None and row["cf"] is None
        assert row["mpe_out"] is not None

    def test_unknown_method_rejected(self):
        spec = SimulationSpec(1, 100, replications=2)
        with pytest.raises(ValueError):
            run_monte_carlo(spec, ("NOPE",))
