"""Exact minimizers for piecewise-linear check-loss objectives.

Everything here exploits the same fact: a sum of check losses is convex
and piecewise linear, so its minimizers sit on breakpoints (1-D) or on
vertices where enough residuals vanish (multi-D), and a derivative scan
over sorted breakpoints finds them exactly.
"""

from __future__ import annotations

import numpy as np

# tolerance used to declare a directional derivative "descending"
_DERIV_TOL = 1e-12


def check_loss(u, tau: float):
    """Check loss rho_tau(u) = u * (tau - 1{u<0}); vectorized."""
    u = np.asarray(u, dtype=float)
    return u * (tau - (u < 0.0))


def line_objective(r: np.ndarray, d: np.ndarray, tau: float, delta: float,
                   l1: float = 0.0) -> float:
    """Objective sum_i rho_tau(r_i - d_i*delta) + l1*|delta|."""
    return float(np.sum(check_loss(r - d * delta, tau))) + l1 * abs(delta)


def line_min(r: np.ndarray, d: np.ndarray, tau: float):
    """Exact minimizer of delta -> sum_i rho_tau(r_i - d_i*delta).

    Returns (delta, row) where row indexes the breakpoint the scan stopped
    at (a row with d[row] != 0 whose residual is zero at the optimum).
    Requires at least one nonzero d.
    """
    d = np.asarray(d, dtype=float)
    r = np.asarray(r, dtype=float)
    nz = np.flatnonzero(d)
    if nz.size == 0:
        raise ValueError("dead coordinate")
    dn = d[nz]
    beta = r[nz] / dn
    # derivative of the objective as delta -> -inf, then jumps of |d_i|
    # at each breakpoint beta_i
    left = float(np.sum(np.where(dn > 0.0, -tau * dn, (1.0 - tau) * dn)))
    order = np.argsort(beta, kind="stable")
    cum = left + np.cumsum(np.abs(dn)[order])
    k = int(np.searchsorted(cum >= 0.0, True))
    if k >= order.size:  # numerically flat tail; last breakpoint is fine
        k = order.size - 1
    row = int(nz[order[k]])
    return float(beta[order[k]]), row


def shrink_line_min(r: np.ndarray, d: np.ndarray, tau: float, l1: float):
    """Exact minimizer of delta -> sum_i rho_tau(r_i - d_i*delta) + l1*|delta|.

    Ties are broken toward 0, then toward the smaller |delta|.
    """
    d = np.asarray(d, dtype=float)
    r = np.asarray(r, dtype=float)
    nz = np.flatnonzero(d)
    if nz.size == 0:
        raise ValueError("dead coordinate")
    dn = d[nz]
    beta = r[nz] / dn
    jolt = np.abs(dn)
    if l1 > 0.0:
        beta = np.append(beta, 0.0)
        jolt = np.append(jolt, 2.0 * l1)
    left = float(np.sum(np.where(dn > 0.0, -tau * dn, (1.0 - tau) * dn))) - l1
    order = np.argsort(beta, kind="stable")
    bs = beta[order]
    cum = left + np.cumsum(jolt[order])
    k = int(np.searchsorted(cum >= 0.0, True))
    if k >= bs.size:
        k = bs.size - 1
    delta = float(bs[k])
    # flat stretch: the optimum is an interval; prefer the point closest to 0
    if k + 1 < bs.size and cum[k] == 0.0:
        nxt = float(bs[k + 1])
        if delta <= 0.0 <= nxt:
            delta = 0.0
        elif abs(nxt) < abs(delta):
            delta = nxt
    # prefer an exact zero whenever it is (numerically) just as good
    if delta != 0.0:
        g_d = line_objective(r, d, tau, delta, l1)
        g_0 = line_objective(r, d, tau, 0.0, l1)
        if g_0 <= g_d + 1e-12 * (1.0 + abs(g_d)):
            delta = 0.0
    return delta


def _pair_refit(u, y, i, j):
    b = (y[j] - y[i]) / (u[j] - u[i])
    a = y[i] - b * u[i]
    return a, b


def wqr2_objective(u, y, w, tau, a, b) -> float:
    return float(np.sum(w * check_loss(y - a - b * u, tau)))


def _crash_pair(u, y, a, b):
    """Two rows of smallest residual with distinct abscissae."""
    r = np.abs(y - a - b * u)
    order = np.argsort(r, kind="stable")
    i0 = int(order[0])
    for idx in order[1:]:
        if u[idx] != u[i0]:
            return i0, int(idx)
    raise ValueError("degenerate design: single distinct abscissa")


def wqr2(u: np.ndarray, y: np.ndarray, w: np.ndarray, tau: float,
         b_init: float = 0.0, ab_init=None, max_pivots: int = 200):
    """Exact weighted two-parameter quantile fit.

    Minimizes sum_i w_i * rho_tau(y_i - a - b*u_i) over (a, b) for strictly
    positive weights w. The optimum interpolates two sample points; starting
    from an anchored descent (or the vertex closest to ab_init), vertices
    are pivoted along edges of the piecewise-linear surface until no edge
    direction descends, which certifies the global minimum.

    Requires at least two distinct u values. Returns (a, b).
    """
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    if ab_init is not None:
        i0, j0 = _crash_pair(u, y, ab_init[0], ab_init[1])
    else:
        # anchor step: best intercept for the initial slope; lands on a point
        _, i0 = line_min(w * (y - b_init * u), w, tau)
        du = u - u[i0]
        if not np.any(du):
            raise ValueError("degenerate design: single distinct abscissa")
        # slope step through the anchor: another exact 1-D scan
        _, j0 = line_min(w * (y - y[i0]), w * du, tau)
    a, b = _pair_refit(u, y, i0, j0)

    best = (wqr2_objective(u, y, w, tau, a, b), a, b)
    scale = 1.0 + abs(best[0])
    tol = _DERIV_TOL * scale
    pair = (i0, j0)
    for _ in range(max_pivots):
        i, j = pair
        r = y - a - b * u
        r[i] = 0.0
        r[j] = 0.0
        psi = np.where(r < 0.0, tau - 1.0, tau) * w
        if np.count_nonzero(r == 0.0) == 2:
            # the only zero residuals are the vertex pair, whose kink
            # corrections are the closed forms below
            ps = float(np.sum(psi))
            pu = float(np.dot(psi, u))
            base_i = pu - u[i] * ps
            base_j = pu - u[j] * ps
            dij = u[j] - u[i]
            win = w[i] * max(-dij, 0.0)
            wip = w[i] * max(dij, 0.0)
            wjn = w[j] * max(-dij, 0.0)
            wjp = w[j] * max(dij, 0.0)
            derivs = (-base_i + wjp, base_i + wjn, -base_j + win, base_j + wip)
        else:
            derivs = []
            zer = r == 0.0
            for anchor in (i, j):
                s_base = u - u[anchor]
                for sigma in (1.0, -1.0):
                    s = sigma * s_base
                    fp = -float(np.dot(psi[~zer], s[~zer]))
                    sz = s[zer]
                    fp += float(np.dot(w[zer], tau * np.maximum(-sz, 0.0)
                                 + (1.0 - tau) * np.maximum(sz, 0.0)))
                    derivs.append(fp)
        kbest = int(np.argmin(derivs))
        deriv = derivs[kbest]
        if deriv >= -tol:
            return a, b  # all edges ascend: certified optimum
        keep = i if kbest < 2 else j
        sigma = 1.0 if kbest % 2 == 0 else -1.0
        s = sigma * (u - u[keep])
        with np.errstate(divide="ignore", invalid="ignore"):
            t = r / s
        valid = np.flatnonzero((s != 0.0) & (t > 0.0) & np.isfinite(t))
        if valid.size == 0:
            break
        order = valid[np.argsort(t[valid], kind="stable")]
        cum = deriv + np.cumsum(w[order] * np.abs(s[order]))
        k = int(np.searchsorted(cum >= 0.0, True))
        if k >= order.size:
            k = order.size - 1
        enter = int(order[k])
        pair = (keep, enter)
        a, b = _pair_refit(u, y, keep, enter)
        obj = wqr2_objective(u, y, w, tau, a, b)
        if obj < best[0]:
            best = (obj, a, b)
        elif obj > best[0] + 1e-9 * scale:
            break  # numerical stall; keep the best certified iterate
    return best[1], best[2]


def _greedy_basis(Z: np.ndarray, prefer: np.ndarray, dim: int):
    """Pick `dim` rows of Z, in `prefer` order, with full rank."""
    rows = []
    Q = None
    for idx in prefer:
        z = Z[idx]
        nz = np.linalg.norm(z)
        if nz == 0.0:
            continue
        if Q is None:
            rows.append(int(idx))
            Q = (z / nz).reshape(1, -1)
        else:
            resid = z - Q.T @ (Q @ z)
            if np.linalg.norm(resid) > 1e-9 * nz:
                rows.append(int(idx))
                Q = np.vstack([Q, resid / np.linalg.norm(resid)])
        if len(rows) == dim:
            return rows
    return None


def edge_descent(Z: np.ndarray, y: np.ndarray, c: np.ndarray,
                 taus: np.ndarray, v0: np.ndarray, max_pivots: int = 500):
    """Exact vertex descent for F(v) = sum_i c_i * rho_{tau_i}(y_i - Z_i.v).

    Starting near v0, moves to a vertex (D residuals pinned to zero for an
    independent row basis) and pivots along edges while any directional
    derivative is negative. For a nondegenerate vertex the 2D edge test is
    sufficient for global optimality of the convex objective.

    Returns (v, certified) where certified is True when the final vertex
    passed the full edge test.
    """
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y, dtype=float)
    c = np.asarray(c, dtype=float)
    taus = np.asarray(taus, dtype=float)
    keep = c > 0.0
    if not np.all(keep):
        Z, y, c, taus = Z[keep], y[keep], c[keep], taus[keep]
    n, dim = Z.shape
    if n < dim:
        return v0.copy(), False

    def objective(v):
        return float(np.sum(c * check_loss(y - Z @ v, taus)))

    r0 = y - Z @ v0
    basis = _greedy_basis(Z, np.argsort(np.abs(r0), kind="stable"), dim)
    if basis is None:
        return v0.copy(), False
    basis = list(basis)
    try:
        v = np.linalg.solve(Z[basis], y[basis])
    except np.linalg.LinAlgError:
        return v0.copy(), False

    best_v = v0.copy()
    best_obj = objective(v0)
    obj = objective(v)
    if obj < best_obj:
        best_obj, best_v = obj, v.copy()
    prev_obj = obj

    tpos = taus
    tneg = taus - 1.0
    for _ in range(max_pivots):
        r = y - Z @ v
        r[basis] = 0.0
        try:
            U = np.linalg.inv(Z[basis])
        except np.linalg.LinAlgError:
            return best_v, False
        S = Z @ U  # S[k, j]: residual rate of row k along edge direction j
        pos = r > 0.0
        neg = r < 0.0
        zer = ~(pos | neg)
        # directional derivative for +d_j and -d_j, all j at once
        base = -(tpos[pos] * c[pos]) @ S[pos] - (tneg[neg] * c[neg]) @ S[neg]
        gplus = base.copy()
        gminus = -base
        if np.any(zer):
            Sz = S[zer]
            cz = c[zer]
            wz_pos = cz * tpos[zer]
            wz_neg = cz * (1.0 - taus[zer])
            gplus += wz_pos @ np.maximum(-Sz, 0.0) + wz_neg @ np.maximum(Sz, 0.0)
            gminus += wz_pos @ np.maximum(Sz, 0.0) + wz_neg @ np.maximum(-Sz, 0.0)
        tol = _DERIV_TOL * (1.0 + abs(obj))
        jp = int(np.argmin(gplus))
        jm = int(np.argmin(gminus))
        if gplus[jp] >= -tol and gminus[jm] >= -tol:
            return (v, True) if obj <= best_obj else (best_v, True)
        if gplus[jp] <= gminus[jm]:
            sigma, j, deriv = 1.0, jp, gplus[jp]
        else:
            sigma, j, deriv = -1.0, jm, gminus[jm]
        s = sigma * S[:, j]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = r / s
        valid = np.flatnonzero((s != 0.0) & (t > 0.0) & np.isfinite(t))
        if valid.size == 0:
            return best_v, False
        order = valid[np.argsort(t[valid], kind="stable")]
        cum = deriv + np.cumsum(c[order] * np.abs(s[order]))
        k = int(np.searchsorted(cum >= 0.0, True))
        if k >= order.size:
            k = order.size - 1
        enter = int(order[k])
        basis[j] = enter
        try:
            v = np.linalg.solve(Z[basis], y[basis])
        except np.linalg.LinAlgError:
            return best_v, False
        obj = objective(v)
        if obj < best_obj:
            best_obj, best_v = obj, v.copy()
        if obj > prev_obj + 1e-9 * (1.0 + abs(prev_obj)):
            return best_v, False  # numerical stall: pivots must descend
        prev_obj = obj
    return best_v, False
