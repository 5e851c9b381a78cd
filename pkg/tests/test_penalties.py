import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quantavg.penalties import (ScadPenalty, check_loss, scad_derivative,
                                scad_value)

finite = st.floats(min_value=-1e6, max_value=1e6,
                   allow_nan=False, allow_infinity=False)


def test_check_loss_examples():
    assert check_loss(0.0, 0.3) == 0.0
    assert check_loss(2.0, 0.75) == pytest.approx(1.5, abs=1e-15)
    assert check_loss(-2.0, 0.75) == pytest.approx(0.5, abs=1e-15)


def test_check_loss_rejects_bad_tau():
    with pytest.raises(ValueError):
        check_loss(1.0, 0.0)


@given(u=finite, v=finite, alpha=st.floats(0.0, 1.0),
       tau=st.floats(0.01, 0.99))
@settings(max_examples=200, deadline=None)
def test_check_loss_convex(u, v, alpha, tau):
    mix = alpha * u + (1 - alpha) * v
    lhs = check_loss(mix, tau)
    rhs = alpha * check_loss(u, tau) + (1 - alpha) * check_loss(v, tau)
    assert lhs <= rhs + 1e-9 * (1.0 + abs(rhs))


def test_scad_value_segments():
    pen = ScadPenalty(0.8, 3.7)
    lam, a = 0.8, 3.7
    assert scad_value(0.0, pen) == 0.0
    assert scad_value(lam, pen) == pytest.approx(lam * lam, abs=1e-15)
    flat = (a + 1) * lam * lam / 2
    assert scad_value(a * lam, pen) == pytest.approx(flat, abs=1e-14)
    assert scad_value(a * lam + 5.0, pen) == pytest.approx(flat, abs=1e-14)


def test_scad_derivative_segments():
    pen = ScadPenalty(1.0, 3.7)
    assert scad_derivative(0.5, pen) == pytest.approx(1.0, abs=1e-15)
    assert scad_derivative(1.0, pen) == pytest.approx(1.0, abs=1e-15)
    assert scad_derivative(3.7, pen) == 0.0
    assert scad_derivative(10.0, pen) == 0.0
    # (a*lam - x)/(a - 1) on the decay segment
    assert scad_derivative(2.0, pen) == pytest.approx((3.7 - 2.0) / 2.7,
                                                      rel=1e-13)


@pytest.mark.parametrize("lam", [0.05, 0.3, 1.0, 4.2])
@pytest.mark.parametrize("a", [2.5, 3.7, 6.0])
def test_scad_continuity_at_kinks(lam, a):
    pen = ScadPenalty(lam, a)
    eps = 1e-9 * max(lam, 1.0)
    for kink in (lam, a * lam):
        left = scad_value(kink - eps, pen)
        right = scad_value(kink + eps, pen)
        assert abs(left - right) < 1e-7 * max(lam, 1.0)
    # exact two-sided limits via the closed forms
    assert scad_value(lam, pen) == pytest.approx(lam * lam, rel=1e-12)
    assert scad_value(a * lam, pen) == pytest.approx((a + 1) * lam * lam / 2,
                                                     rel=1e-12)


@pytest.mark.parametrize("lam,a", [(0.5, 3.7), (1.5, 2.8)])
def test_scad_value_derivative_consistency(lam, a):
    pen = ScadPenalty(lam, a)
    xs = np.linspace(1e-4, 1.5 * a * lam, 400)
    eps = 1e-6
    num = (pen.value(xs + eps) - pen.value(xs - eps)) / (2 * eps)
    ana = pen.derivative(xs)
    near_kink = (np.abs(xs - lam) < 10 * eps) | (np.abs(xs - a * lam) < 10 * eps)
    assert np.max(np.abs(num[~near_kink] - ana[~near_kink])) < 1e-6


def test_scad_monotone_nondecreasing():
    pen = ScadPenalty(0.7)
    xs = np.linspace(0.0, 5.0, 1001)
    vals = pen.value(xs)
    assert np.all(np.diff(vals) >= -1e-15)


def test_scad_parameter_validation():
    with pytest.raises(ValueError):
        ScadPenalty(-0.1)
    with pytest.raises(ValueError):
        ScadPenalty(1.0, 2.0)
