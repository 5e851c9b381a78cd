"""Penalized (and unpenalized) estimation of model-averaging weights.

The quantile route minimizes

    sum_i rho_tau(y_i - w0 - M_i . w) + n * sum_j p_lam(|w_j|)

by cyclic coordinate descent with an exact breakpoint search per
coordinate. The concave SCAD penalty is handled by a local linear
approximation refreshed every sweep, which keeps the true objective
nonincreasing. Because coordinate descent can stall at non-optimal corners
of a piecewise-linear surface, each converged sweep is polished by an
exact edge-descent pass on the current surrogate, so the lam = 0 problem
is solved to optimality.

The least-squares route (for the mean-prediction baselines) uses
closed-form SCAD coordinate updates and k-fold cross-validation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import pwl
from .errors import NumericalError
from .penalties import ScadPenalty, check_loss
from .rng import derive_rng

ZERO_TOL = 1e-8


@dataclass(frozen=True)
class WeightVector:
    """Intercept plus model-averaging weights; support = nonzero weights."""

    w0: float
    w: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.w, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "w", arr)
        object.__setattr__(self, "w0", float(self.w0))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(np.abs(self.w) > ZERO_TOL))

    @property
    def p(self) -> int:
        return self.w.size


@dataclass(frozen=True)
class SolverReport:
    objective_trace: np.ndarray
    sweeps: int
    converged: bool
    final_objective: float


@dataclass(frozen=True)
class MsicSelection:
    lambda_grid: np.ndarray
    msic_values: np.ndarray
    chosen_lambda: float
    chosen_weights: WeightVector
    df_per_lambda: np.ndarray
    C_n: float
    chosen_report: SolverReport | None = None


def weighted_univariate_quantile_min(residuals, multipliers, tau: float,
                                     l1_weight: float = 0.0) -> float:
    """Exact minimizer of d -> sum_i rho_tau(r_i - m_i*d) + l1_weight*|d|.

    The objective is convex piecewise linear, so a minimizer lies on a
    breakpoint r_i/m_i (or at 0); ties break toward 0, then the smaller |d|.
    """
    multipliers = np.asarray(multipliers, dtype=float)
    if not np.any(multipliers):
        raise NumericalError("dead coordinate")
    return pwl.shrink_line_min(np.asarray(residuals, dtype=float),
                               multipliers, tau, l1_weight)


def tau_quantile(y, tau: float) -> float:
    """Exact minimizer of c -> sum_i rho_tau(y_i - c)."""
    y = np.asarray(y, dtype=float)
    return pwl.shrink_line_min(y, np.ones_like(y), tau, 0.0)


def quantile_objective(design, y, tau, pen: ScadPenalty, w0: float, w) -> float:
    """The penalized check-loss objective evaluated exactly."""
    r = y - w0 - design @ w
    loss = float(np.sum(check_loss(r, tau)))
    return loss + y.size * float(np.sum(pen.value(np.abs(w))))


def _polish(design, y, tau, omega, w0, w):
    """Exact edge descent on the weighted-L1 surrogate at the current point.

    omega[j] is the active L1 weight n*dp(|w_j|); it enters as a pseudo-row
    with check level 0.5 since omega*|w_j| = 2*omega*rho_0.5(w_j).
    """
    n, p = design.shape
    Z = np.empty((n, p + 1))
    Z[:, 0] = 1.0
    Z[:, 1:] = design
    c = np.ones(n)
    yy = y
    taus = np.full(n, tau)
    pen_cols = np.flatnonzero(omega > 0.0)
    if pen_cols.size:
        extra = np.zeros((pen_cols.size, p + 1))
        extra[np.arange(pen_cols.size), pen_cols + 1] = 1.0
        Z = np.vstack([Z, extra])
        yy = np.concatenate([y, np.zeros(pen_cols.size)])
        c = np.concatenate([c, 2.0 * omega[pen_cols]])
        taus = np.concatenate([taus, np.full(pen_cols.size, 0.5)])
    v0 = np.concatenate([[w0], w])
    v, _ = pwl.edge_descent(Z, yy, c, taus, v0)
    moved = float(np.max(np.abs(v - v0)))
    return float(v[0]), v[1:].copy(), moved


def solve_penalized_quantile(design, y, tau: float, pen: ScadPenalty,
                             init: WeightVector | None = None,
                             tol: float = 1e-6, max_sweeps: int = 200,
                             polish: bool = True):
    """Minimize the SCAD-penalized check-loss objective over (w0, w).

    Never raises on slow progress: after max_sweeps the best iterate is
    returned with converged=False. Weights below 1e-8 in magnitude are
    snapped to exactly zero on exit.
    """
    design = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = design.shape
    if n <= 2:
        raise ValueError("need more than two observations")
    if not np.all(np.isfinite(design)):
        raise ValueError("design matrix contains non-finite values")
    if init is None:
        w0 = tau_quantile(y, tau)
        w = np.zeros(p)
    else:
        w0 = float(init.w0)
        w = init.w.copy()
    r = y - w0 - design @ w
    dead = ~np.any(design != 0.0, axis=0)
    trace = []
    converged = False
    sweeps = 0
    ones = np.ones(n)
    while sweeps < max_sweeps:
        sweeps += 1
        omega = n * pen.derivative(np.abs(w))
        w0_old = w0
        w_old = w.copy()
        d0 = pwl.shrink_line_min(r, ones, tau, 0.0)
        w0 += d0
        r -= d0
        for j in range(p):
            if dead[j]:
                w[j] = 0.0
                continue
            dj = design[:, j]
            rp = r + dj * w[j]
            wj = pwl.shrink_line_min(rp, dj, tau, omega[j])
            w[j] = wj
            r = rp - dj * wj
        delta = max(float(np.max(np.abs(w - w_old), initial=0.0)),
                    abs(w0 - w0_old))
        obj = quantile_objective(design, y, tau, pen, w0, w)
        trace.append(obj)
        # coordinate sweeps can zigzag along flat valleys of the piecewise
        # linear surface or stop at non-optimal corners; once progress
        # stalls, an exact edge-descent pass on the refreshed surrogate
        # either certifies the corner or escapes it
        stalled = (sweeps >= 2
                   and trace[-2] - trace[-1] < 1e-9 * (1.0 + abs(trace[-1])))
        if delta < tol or stalled:
            if not polish:
                converged = delta < tol
                break
            omega_now = n * pen.derivative(np.abs(w))
            w0, w, moved = _polish(design, y, tau, omega_now, w0, w)
            r = y - w0 - design @ w
            trace.append(quantile_objective(design, y, tau, pen, w0, w))
            if moved < tol:
                converged = True
                break
    w = np.where(np.abs(w) < ZERO_TOL, 0.0, w)
    final = quantile_objective(design, y, tau, pen, w0, w)
    return (WeightVector(w0, w),
            SolverReport(np.asarray(trace), sweeps, converged, final))


def lambda_grid_quantile(design, y, tau: float, size: int = 50,
                         ratio: float = 1e-3, a: float = 3.7) -> np.ndarray:
    """Ascending log-spaced grid from lam_max*ratio up to lam_max.

    lam_max combines the marginal-score bound (below which a weight leaves
    zero under the L1 majorization) with a concavity-aware bound: for each
    coordinate the exact single-coordinate fit gain Delta_j must be beaten
    by the flat penalty, which needs lam >= max(Delta/(n|d*|), sqrt(Delta/n)).
    This makes the top of the grid an actual full-shrinkage point.
    """
    design = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.size
    q = tau_quantile(y, tau)
    r = y - q
    psi = tau - (r < 0.0)
    scores = np.abs(design.T @ psi) / n
    lam_max = float(np.max(scores, initial=0.0))
    null_loss = float(np.sum(check_loss(r, tau)))
    for j in range(design.shape[1]):
        dj = design[:, j]
        if not np.any(dj):
            continue
        delta = pwl.shrink_line_min(r, dj, tau, 0.0)
        gain = null_loss - float(np.sum(check_loss(r - dj * delta, tau)))
        if gain <= 0.0 or delta == 0.0:
            continue
        lam_max = max(lam_max, gain / (n * abs(delta)), np.sqrt(gain / n))
    if lam_max <= 0.0:
        lam_max = 1.0
    return np.geomspace(lam_max * ratio, lam_max, size)


def select_lambda_msic(design, y, tau: float, grid, C_n: float, a: float = 3.7,
                       tol: float = 1e-6, max_sweeps: int = 200) -> MsicSelection:
    """Solve along the lam grid and pick the MSIC minimizer.

    Each grid point is solved twice, warm-started from the previous lam and
    cold-started from zero, keeping the lower objective: SCAD is nonconvex
    and the warm path alone can trap noise weights in its zero-derivative
    region. MSIC(lam) = log(check-loss sum) + df*C_n*log(n)/(2n) with df
    the number of nonzero weights (intercept excluded); ties pick the
    smaller lam. The chosen solution is re-polished exactly.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty lambda grid")
    if np.any(np.diff(grid) < 0.0):
        raise ValueError("lambda grid must be sorted ascending")
    design = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.size
    msic = np.empty(grid.size)
    dfs = np.empty(grid.size, dtype=int)
    # descending pass first: starting from full shrinkage keeps the chain
    # sparse, which the ascending pass cannot reach once weights escape
    # past the flat region of the penalty
    desc: list[WeightVector | None] = [None] * grid.size
    init = None
    for k in range(grid.size - 1, -1, -1):
        pen = ScadPenalty(float(grid[k]), a)
        wv, _ = solve_penalized_quantile(design, y, tau, pen, init=init,
                                         tol=tol, max_sweeps=max_sweeps)
        desc[k] = wv
        init = wv
    sols = []
    init = None
    for k, lam in enumerate(grid):
        pen = ScadPenalty(float(lam), a)
        wv, rep = solve_penalized_quantile(design, y, tau, pen, init=init,
                                           tol=tol, max_sweeps=max_sweeps)
        cands = [(rep.final_objective, wv, rep),
                 (quantile_objective(design, y, tau, pen,
                                     desc[k].w0, desc[k].w), desc[k], None)]
        _, wv, rep = min(cands, key=lambda t: t[0])
        init = wv
        loss = float(np.sum(check_loss(y - wv.w0 - design @ wv.w, tau)))
        if loss <= 0.0:
            raise NumericalError("degenerate objective")
        dfs[k] = len(wv.support)
        msic[k] = np.log(loss) + dfs[k] * C_n * np.log(n) / (2.0 * n)
        sols.append((wv, rep))
    best = int(np.argmin(msic))
    chosen, report = sols[best]
    if report is None:  # the descending-chain candidate won; refresh its report
        chosen, report = solve_penalized_quantile(
            design, y, tau, ScadPenalty(float(grid[best]), a), init=chosen,
            tol=tol, max_sweeps=max_sweeps)
    return MsicSelection(
        lambda_grid=grid,
        msic_values=msic,
        chosen_lambda=float(grid[best]),
        chosen_weights=chosen,
        df_per_lambda=dfs,
        C_n=float(C_n),
        chosen_report=report,
    )


def solve_least_squares(design, y) -> WeightVector:
    """Ordinary least squares with an intercept (minimum-norm on ties)."""
    design = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.column_stack([np.ones(y.size), design])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return WeightVector(coef[0], coef[1:])


def _scad_ls_coordinate(v: float, z: float, pen: ScadPenalty) -> float:
    """Exact minimizer of q(d) = v/2*d^2 - z*d + p_lam(|d|), v > 0."""
    lam, a = pen.lam, pen.a
    cands = [0.0]
    if lam == 0.0:
        cands.append(z / v)
    else:
        cands.extend((lam, -lam, a * lam, -a * lam))
        # inner piece: soft threshold at lam
        for s in (1.0, -1.0):
            d = (z - s * lam) / v
            cands.append(min(max(d * s, 0.0), lam) * s)
        # middle piece: stationary point if the piece stays convex
        denom = v - 1.0 / (a - 1.0)
        if denom > 0.0:
            for s in (1.0, -1.0):
                d = (z - s * a * lam / (a - 1.0)) / denom
                cands.append(min(max(d * s, lam), a * lam) * s)
        # flat piece
        d = z / v
        if abs(d) >= a * lam:
            cands.append(d)
    vals = [0.5 * v * d * d - z * d + pen.value(abs(d)) for d in cands]
    return cands[int(np.argmin(vals))]


def solve_penalized_least_squares(design, y, pen: ScadPenalty,
                                  init: WeightVector | None = None,
                                  tol: float = 1e-10,
                                  max_sweeps: int = 1000) -> WeightVector:
    """SCAD-penalized least squares by exact coordinate descent.

    Minimizes (1/2n)*sum (y - w0 - M.w)^2 + sum_j p_lam(|b_j|) where b is
    the coefficient vector of the standardized (unit-variance) columns,
    the convention of the reference penalized-least-squares
    implementations; the intercept is unpenalized and profiled out, so
    the sweeps run on the Gram matrix of the standardized centered
    design (O(p) per coordinate). Returned weights are on the original
    scale.
    """
    design = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = design.shape
    xbar = design.mean(axis=0)
    ybar = float(np.mean(y))
    Xc = design - xbar
    scale = np.sqrt(np.einsum("ij,ij->j", Xc, Xc) / n)
    live = scale > 0.0
    Xs = np.where(live, Xc / np.where(live, scale, 1.0), 0.0)
    yc = y - ybar
    G = (Xs.T @ Xs) / n
    c = (Xs.T @ yc) / n
    syy = float(yc @ yc) / n
    if init is None:
        b = np.zeros(p)
    else:
        b = init.w * np.where(live, scale, 1.0)
    q = G @ b
    diag = np.diag(G).copy()
    obj_prev = np.inf
    for _ in range(max_sweeps):
        delta = 0.0
        for j in range(p):
            vj = diag[j]
            if vj <= 0.0:
                b[j] = 0.0
                continue
            zj = c[j] - q[j] + vj * b[j]
            nj = _scad_ls_coordinate(vj, zj, pen)
            step = nj - b[j]
            if step != 0.0:
                q += G[:, j] * step
                b[j] = nj
                delta = max(delta, abs(step))
        q = G @ b  # kill incremental drift
        obj = (0.5 * (syy - 2.0 * float(c @ b) + float(b @ q))
               + float(np.sum(pen.value(np.abs(b)))))
        if delta < tol or obj_prev - obj < 1e-16 * (1.0 + abs(obj)):
            break
        obj_prev = obj
    b = np.where(np.abs(b) < ZERO_TOL, 0.0, b)
    w = np.where(live, b / np.where(live, scale, 1.0), 0.0)
    w0 = ybar - float(xbar @ w)
    return WeightVector(w0, w)


def lambda_grid_least_squares(design, y, size: int = 50,
                              ratio: float = 1e-3) -> np.ndarray:
    design = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.size
    Xc = design - design.mean(axis=0)
    scale = np.sqrt(np.einsum("ij,ij->j", Xc, Xc) / n)
    Xs = np.where(scale > 0.0, Xc / np.where(scale > 0.0, scale, 1.0), 0.0)
    scores = np.abs(Xs.T @ (y - np.mean(y))) / n
    lam_max = float(np.max(scores))
    if lam_max <= 0.0:
        lam_max = 1.0
    return np.geomspace(lam_max * ratio, lam_max, size)


def select_lambda_cv_least_squares(design, y, grid, a: float = 3.7,
                                   n_folds: int = 5, seed: int = 0):
    """Pick lam by k-fold cross-validated squared error, then refit.

    Returns (chosen_lambda, WeightVector, cv_values).
    """
    design = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float)
    grid = np.asarray(grid, dtype=float)
    n = y.size
    if n_folds < 2 or n_folds > n:
        raise ValueError("n_folds must be in [2, n]")
    perm = derive_rng(seed, "cvfolds").permutation(n)
    folds = [np.sort(perm[k::n_folds]) for k in range(n_folds)]
    cv = np.zeros(grid.size)
    for fold in folds:
        mask = np.ones(n, dtype=bool)
        mask[fold] = False
        init = None
        for k, lam in enumerate(grid):
            wv = solve_penalized_least_squares(design[mask], y[mask],
                                               ScadPenalty(float(lam), a),
                                               init=init, tol=1e-7)
            init = wv
            resid = y[fold] - wv.w0 - design[fold] @ wv.w
            cv[k] += float(np.dot(resid, resid))
    best = int(np.argmin(cv))
    init = None
    chosen = None
    for k, lam in enumerate(grid[:best + 1]):
        chosen = solve_penalized_least_squares(design, y,
                                               ScadPenalty(float(lam), a),
                                               init=init)
        init = chosen
    return float(grid[best]), chosen, cv
