import numpy as np
import pytest
from scipy.stats import norm

from quantavg.errors import NumericalError
from quantavg.kernels import (bandwidth_plan, epanechnikov, pilot_bandwidth,
                              quantile_bandwidth, rule_of_thumb_bandwidth)


def test_epanechnikov_values():
    assert epanechnikov(0.0) == 0.75
    assert epanechnikov(1.0) == 0.0
    assert epanechnikov(-1.0) == 0.0
    assert epanechnikov(0.5) == pytest.approx(0.5625, abs=1e-15)
    assert epanechnikov(3.0) == 0.0


def test_epanechnikov_symmetric_nonnegative(rng):
    u = rng.uniform(-3, 3, 1000)
    k = epanechnikov(u)
    assert np.all(k >= 0.0)
    assert np.allclose(k, epanechnikov(-u))


def test_kernel_moments_by_quadrature():
    # integral K = 1, integral uK = 0, mu2 = 1/5, nu0 = 3/5
    u = np.linspace(-1.0, 1.0, 200001)
    k = epanechnikov(u)
    assert np.trapezoid(k, u) == pytest.approx(1.0, abs=1e-6)
    assert np.trapezoid(u * k, u) == pytest.approx(0.0, abs=1e-6)
    assert np.trapezoid(u * u * k, u) == pytest.approx(0.2, abs=1e-6)
    assert np.trapezoid(k * k, u) == pytest.approx(0.6, abs=1e-6)


def _unit_sd_sample(rng, n):
    z = rng.standard_normal(n)
    z = z - z.mean()
    return z / z.std(ddof=1)


def test_pilot_bandwidth_normal_reference(rng):
    x = _unit_sd_sample(rng, 200)
    assert pilot_bandwidth(x) == pytest.approx(1.06 * 200 ** -0.2, rel=1e-12)


def test_pilot_bandwidth_scales_with_sd(rng):
    x = _unit_sd_sample(rng, 200)
    assert pilot_bandwidth(2.0 * x) == pytest.approx(2.0 * pilot_bandwidth(x),
                                                     rel=1e-12)


def test_pilot_bandwidth_zero_variance():
    with pytest.raises(NumericalError, match="zero variance"):
        pilot_bandwidth(np.full(50, 3.0))


def test_quantile_bandwidth_median():
    expect = (0.25 / norm.pdf(0.0)) ** 0.2
    assert quantile_bandwidth(1.0, 0.5) == pytest.approx(expect, rel=1e-12)
    assert quantile_bandwidth(1.0, 0.5) == pytest.approx(0.9108, abs=5e-4)


def test_quantile_bandwidth_symmetry_and_scaling():
    assert quantile_bandwidth(1.0, 0.75) == pytest.approx(
        quantile_bandwidth(1.0, 0.25), rel=1e-13)
    assert quantile_bandwidth(2.0, 0.5) == pytest.approx(
        2.0 * quantile_bandwidth(1.0, 0.5), rel=1e-13)


@pytest.mark.parametrize("tau", [0.0, 1.0, -0.2, 1.7])
def test_quantile_bandwidth_domain(tau):
    with pytest.raises(ValueError):
        quantile_bandwidth(1.0, tau)


def test_rule_of_thumb_matches_plugin_formula(rng):
    # quadratic truth, near-noiseless so the pilot curvature is ~exactly 2
    # and the plug-in value is analytic
    n = 4000
    sigma = 0.02
    x = rng.uniform(0.0, 1.0, n)
    y = x * x + sigma * rng.standard_normal(n)
    h = rule_of_thumb_bandwidth(x, y)
    expect = 15.0 ** 0.2 * (sigma ** 2 * (x.max() - x.min()) / (4.0 * n)) ** 0.2
    assert h == pytest.approx(expect, rel=0.1)


def test_rule_of_thumb_caps_flat_curvature(rng):
    x = rng.uniform(0.0, 2.0, 500)
    y = 1.0 + 2.0 * x + 0.1 * rng.standard_normal(500)  # linear: no curvature
    h = rule_of_thumb_bandwidth(x, y)
    assert h <= x.max() - x.min() + 1e-12


def test_bandwidth_plan_overrides(rng):
    X = rng.uniform(0, 1, (100, 3))
    y = X[:, 0] + rng.standard_normal(100)
    plan = bandwidth_plan(X, 0.5, y=y, overrides={1: 0.25})
    assert plan.h[1] == 0.25
    assert plan.h[0] == pytest.approx(
        quantile_bandwidth(rule_of_thumb_bandwidth(X[:, 0], y), 0.5), rel=1e-12)
    with pytest.raises(ValueError):
        bandwidth_plan(X, 0.5, y=y, overrides={0: -1.0})
    with pytest.raises(ValueError):
        bandwidth_plan(X, 0.5)  # rot pilot needs the response
