"""Local linear marginal smoothers (quantile and mean flavors).

Each covariate gets its own one-dimensional regression of the response on
that covariate alone, fitted pointwise by kernel-weighted local linear
regression. Quantile fits minimize the weighted check loss exactly via
``pwl.wqr2``; mean fits use closed-form weighted least squares.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import NumericalError
from .kernels import BandwidthPlan, epanechnikov
from .pwl import wqr2

QUANTILE = "quantile"
MEAN = "mean"

# how many times a too-empty kernel window is doubled before giving up
_MAX_WIDENINGS = 5


def fit_local_linear_quantile(x, y, tau: float, h: float, x0: float):
    """Exact local linear quantile fit at x0.

    Minimizes sum_i rho_tau(y_i - a - b*(x_i - x0)) * K((x_i - x0)/h) and
    returns (a, b) = (level, slope). Requires at least two points with
    positive kernel weight at two distinct abscissae.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u = (x - x0) / h
    w = epanechnikov(u)
    mask = w > 0.0
    um = x[mask] - x0
    if um.size < 2 or um.min() == um.max():
        raise NumericalError(f"bandwidth too small at x0={x0}")
    return wqr2(um, y[mask], w[mask], tau)


def fit_local_linear_mean(x, y, h: float, x0: float):
    """Closed-form local linear least-squares fit at x0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u = x - x0
    w = epanechnikov(u / h)
    mask = w > 0.0
    return _wls(u[mask], y[mask], w[mask])


def _wls(u, y, w):
    s0 = float(np.sum(w))
    s1 = float(np.dot(w, u))
    s2 = float(np.dot(w, u * u))
    t0 = float(np.dot(w, y))
    t1 = float(np.dot(w, u * y))
    det = s0 * s2 - s1 * s1
    if u.size < 2 or det <= 1e-12 * max(s0 * s2, 1e-300):
        raise NumericalError("singular local design")
    return (s2 * t0 - s1 * t1) / det, (s0 * t1 - s1 * t0) / det


def _window(xs, x0, h):
    lo = int(np.searchsorted(xs, x0 - h, side="right"))
    hi = int(np.searchsorted(xs, x0 + h, side="left"))
    return lo, hi


def _fit_sorted(xs, ys, x0, h, tau, loss, ab_init=None):
    """Fit at x0 on presorted data, doubling h while the window is degenerate."""
    h_eff = h
    for _ in range(_MAX_WIDENINGS + 1):
        lo, hi = _window(xs, x0, h_eff)
        if hi - lo >= 2 and xs[lo] != xs[hi - 1]:
            u = xs[lo:hi] - x0
            w = epanechnikov(u / h_eff)
            if loss == QUANTILE:
                return wqr2(u, ys[lo:hi], w, tau, ab_init=ab_init)
            return _wls(u, ys[lo:hi], w)
        h_eff *= 2.0
    raise NumericalError(f"bandwidth too small at x0={x0}")


@dataclass(frozen=True)
class MarginalModel:
    """One fitted marginal curve: levels and slopes at the training points.

    `knots` is the sorted copy of the training covariate values with
    `fitted_levels`, `fitted_slopes` and `y_sorted` aligned to it.
    Instances are immutable and safe to share across threads.
    """

    covariate_index: int
    tau: float | None
    bandwidth: float
    knots: np.ndarray
    fitted_levels: np.ndarray
    fitted_slopes: np.ndarray
    support: tuple[float, float]
    loss: str = QUANTILE
    y_sorted: np.ndarray | None = None
    eval_mode: str = "refit"

    def __post_init__(self):
        for name in ("knots", "fitted_levels", "fitted_slopes", "y_sorted"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.ascontiguousarray(arr, dtype=float)
                arr.flags.writeable = False
                object.__setattr__(self, name, arr)
        if not np.all(np.isfinite(self.fitted_levels)):
            raise NumericalError(
                f"covariate {self.covariate_index}: non-finite fitted levels")
        if self.eval_mode not in ("refit", "interpolate"):
            raise ValueError(f"unknown eval_mode {self.eval_mode!r}")


def evaluate_marginal(model: MarginalModel, x_new: float) -> float:
    """Evaluate a fitted marginal curve at a new point.

    Inside the training support the local fit is recomputed at x_new
    (or interpolated between knot fits when eval_mode="interpolate" or the
    model was loaded without its training responses). Outside the support
    the curve continues linearly from the nearest boundary fit.
    """
    if not np.isfinite(x_new):
        raise ValueError(f"non-finite evaluation point {x_new!r}")
    return _evaluate(model, float(x_new))


def _evaluate(model: MarginalModel, x_new: float) -> float:
    knots = model.knots
    lo, hi = model.support
    if x_new < lo:
        return float(model.fitted_levels[0] + model.fitted_slopes[0] * (x_new - lo))
    if x_new > hi:
        return float(model.fitted_levels[-1] + model.fitted_slopes[-1] * (x_new - hi))
    i = int(np.searchsorted(knots, x_new))
    if i < knots.size and knots[i] == x_new:
        return float(model.fitted_levels[i])
    if model.eval_mode == "interpolate" or model.y_sorted is None:
        return float(np.interp(x_new, knots, model.fitted_levels))
    k = min(i, knots.size - 1)  # warm start from the nearest knot's fit
    ab = (float(model.fitted_levels[k]
                + model.fitted_slopes[k] * (x_new - knots[k])),
          float(model.fitted_slopes[k]))
    level, _ = _fit_sorted(knots, model.y_sorted, x_new, model.bandwidth,
                           model.tau, model.loss, ab_init=ab)
    return level


def evaluate_marginal_many(model: MarginalModel, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    bad = np.flatnonzero(~np.isfinite(xs))
    if bad.size:
        raise ValueError(f"non-finite evaluation point at position {bad[0]}")
    return np.array([_evaluate(model, float(v)) for v in xs])


def build_marginal_models(data: Dataset, taus, plan: BandwidthPlan,
                          loss: str = QUANTILE):
    """Fit every marginal curve and collect the in-sample fit matrix.

    Returns (models, fits) where fits[i, j] is the j-th marginal evaluated
    at X[i, j]. Quantile fits use plan.h per covariate, mean fits the
    least-squares pilot plan.h_ls. `taus` may be a scalar or a per-covariate
    sequence; it is ignored for mean loss.
    """
    if loss not in (QUANTILE, MEAN):
        raise ValueError(f"unknown loss {loss!r}")
    n, p = data.n, data.p
    taus = np.broadcast_to(np.asarray(taus, dtype=float), (p,))
    models = []
    fits = np.empty((n, p))
    for j in range(p):
        h = float(plan.h[j] if loss == QUANTILE else plan.h_ls[j])
        tau_j = float(taus[j]) if loss == QUANTILE else None
        order = np.argsort(data.X[:, j], kind="stable")
        xs = data.X[order, j]
        ys = data.y[order]
        uniq, inverse = np.unique(xs, return_inverse=True)
        lev_u = np.empty(uniq.size)
        slo_u = np.empty(uniq.size)
        prev = None  # (level, slope, x0) of the previous knot, as a warm start
        try:
            for k, x0 in enumerate(uniq):
                x0 = float(x0)
                ab = None
                if prev is not None:
                    ab = (prev[0] + prev[1] * (x0 - prev[2]), prev[1])
                lev_u[k], slo_u[k] = _fit_sorted(xs, ys, x0, h, tau_j,
                                                 loss, ab_init=ab)
                prev = (lev_u[k], slo_u[k], x0)
        except NumericalError as exc:
            raise NumericalError(f"covariate {j}: {exc}") from exc
        levels = lev_u[inverse]
        slopes = slo_u[inverse]
        fits[order, j] = levels
        models.append(MarginalModel(
            covariate_index=j,
            tau=tau_j,
            bandwidth=h,
            knots=xs,
            fitted_levels=levels,
            fitted_slopes=slopes,
            support=(float(xs[0]), float(xs[-1])),
            loss=loss,
            y_sorted=ys,
        ))
    return models, fits
