"""Dense bounded-variable primal simplex for ``max c.x, A x <= b, 0 <= x <= u``.

Only the case ``b >= 0`` is supported, so the all-slack basis at ``x = 0``
is feasible and no phase one is needed. Upper bounds are handled by the
bounded-variable ratio test instead of extra rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LPResult", "LPError", "solve_lp"]


class LPError(RuntimeError):
    pass


@dataclass
class LPResult:
    x: np.ndarray
    objective: float
    dual: np.ndarray
    iterations: int
    residual: float


def solve_lp(c, A, b, upper=None, tol=1e-9, max_iter=100_000, check_tol=1e-6) -> LPResult:
    """Maximise ``c @ x`` subject to ``A @ x <= b`` and ``0 <= x <= upper``.

    After termination the primal residual, dual feasibility and
    complementary slackness are checked; any residual above ``check_tol``
    (relative to the data scale) raises :class:`LPError`.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if np.any(b < 0):
        raise LPError("right-hand side must be nonnegative")
    u = np.full(n + m, np.inf)
    if upper is not None:
        u[:n] = np.asarray(upper, dtype=float)

    T = np.hstack([A, np.eye(m)])
    cost = np.concatenate([c, np.zeros(m)])
    basis = np.arange(n, n + m)
    at_upper = np.zeros(n + m, dtype=bool)
    beta = b.copy()  # values of basic variables
    d = cost.copy()  # reduced costs (basis costs are zero initially)
    scale = max(1.0, float(np.abs(c).max(initial=0.0)))
    dtol = tol * scale
    is_basic = np.zeros(n + m, dtype=bool)
    is_basic[basis] = True

    it = 0
    degenerate_run = 0
    while True:
        eligible = ~is_basic & (((d > dtol) & ~at_upper) | ((d < -dtol) & at_upper))
        if not eligible.any():
            break
        if it >= max_iter:
            raise LPError(f"no convergence after {max_iter} iterations")
        if degenerate_run > 50:
            j = int(np.flatnonzero(eligible)[0])  # Bland's rule
        else:
            j = int(np.argmax(np.where(eligible, np.abs(d), -1.0)))
        sigma = -1.0 if at_upper[j] else 1.0
        col = T[:, j]
        alpha = sigma * col

        theta = u[j]
        leave = -1
        with np.errstate(divide="ignore", invalid="ignore"):
            dec = alpha > tol
            ratios = np.full(m, np.inf)
            ratios[dec] = beta[dec] / alpha[dec]
            inc = alpha < -tol
            ub = u[basis]
            ratios[inc] = (ub[inc] - beta[inc]) / -alpha[inc]
        ratios = np.maximum(ratios, 0.0)
        if m:
            rmin = ratios.min()
            if rmin < theta:
                cand = np.flatnonzero(ratios <= rmin + 1e-12)
                # Bland-style tie-break on the leaving variable index
                leave = int(cand[np.argmin(basis[cand])]) if degenerate_run > 50 else int(
                    cand[np.argmax(np.abs(alpha[cand]))])
                theta = ratios[leave]
        if not np.isfinite(theta):
            raise LPError("problem is unbounded")

        beta -= theta * alpha
        degenerate_run = degenerate_run + 1 if theta <= 1e-12 else 0
        it += 1
        if leave < 0:
            at_upper[j] = not at_upper[j]
            continue

        out = basis[leave]
        at_upper[out] = alpha[leave] < 0
        entering_value = (u[j] - theta) if sigma < 0 else theta
        at_upper[j] = False

        piv = T[leave, j]
        T[leave] /= piv
        others = col.copy()
        others[leave] = 0.0
        T -= np.outer(others, T[leave])
        d -= d[j] * T[leave]
        beta[leave] = entering_value
        basis[leave] = j
        is_basic[out] = False
        is_basic[j] = True
        np.clip(beta, 0.0, None, out=beta)

    z = np.where(at_upper, u, 0.0)
    z[basis] = beta
    x = z[:n]
    y = -d[n:]
    obj = float(c @ x)
    resid = _certify(c, A, b, u[:n], x, y, d[:n], at_upper[:n], is_basic[:n])
    if resid > check_tol:
        raise LPError(f"optimality certificate failed (residual {resid:.3g})")
    return LPResult(x=x, objective=obj, dual=y, iterations=it, residual=resid)


def _certify(c, A, b, u, x, y, dj, at_upper, basic):
    scale = max(1.0, float(np.abs(c).max(initial=0.0)), float(np.abs(b).max(initial=0.0)))
    slack = b - A @ x
    primal = max(-slack.min(initial=0.0), -x.min(initial=0.0), float(np.max(x - u, initial=0.0)))
    dual_inf = max(-y.min(initial=0.0), 0.0)
    free = ~basic
    bad_dj = np.where(at_upper & free, np.maximum(-dj, 0.0), np.where(free, np.maximum(dj, 0.0), 0.0))
    cs = float(np.abs(y * slack).max(initial=0.0))
    upper_term = np.where(np.isfinite(u), u, 0.0) @ np.maximum(dj, 0.0)
    gap = abs(float(c @ x) - (float(b @ y) + float(upper_term)))
    return max(primal, dual_inf / scale, float(bad_dj.max(initial=0.0)) / scale, cs / scale, gap / scale)
