"""Check loss and the SCAD penalty."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def check_loss(u, tau: float):
    """rho_tau(u) = tau*u for u >= 0, (tau-1)*u for u < 0; vectorized."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    u = np.asarray(u, dtype=float)
    out = u * (tau - (u < 0.0))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ScadPenalty:
    """Smoothly clipped absolute deviation penalty p_lam with shape a > 2.

    The derivative is lam on (0, lam], decays linearly as (a*lam - x)/(a-1)
    on (lam, a*lam) and vanishes beyond a*lam; the value is its integral
    with p_lam(0) = 0, so large coefficients incur a flat penalty
    (a+1)*lam^2/2 and no shrinkage bias.
    """

    lam: float
    a: float = 3.7

    def __post_init__(self):
        if self.lam < 0.0:
            raise ValueError("lam must be nonnegative")
        if self.a <= 2.0:
            raise ValueError("a must exceed 2")

    def value(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        lam, a = self.lam, self.a
        flat = (a + 1.0) * lam * lam / 2.0
        mid = -(x * x - 2.0 * a * lam * x + lam * lam) / (2.0 * (a - 1.0))
        out = np.where(x <= lam, lam * x, np.where(x <= a * lam, mid, flat))
        return out if out.ndim else float(out)

    def derivative(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        lam, a = self.lam, self.a
        decay = np.maximum(a * lam - x, 0.0) / (a - 1.0)
        out = np.where(x <= lam, lam, decay)
        return out if out.ndim else float(out)


def scad_value(x, pen: ScadPenalty):
    return pen.value(x)


def scad_derivative(x, pen: ScadPenalty):
    return pen.derivative(x)
