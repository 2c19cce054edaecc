"""Entropy-regularized OT: plain Sinkhorn scaling and a log-domain stabilized variant.

Convention: the objective is <P, M> - h(P) / lam, so the Gibbs kernel is
exp(-lam * M).  Larger ``lam`` means weaker regularization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .measures import (
    SolverOptions,
    as_cost,
    as_weights,
    check_lambda,
    check_shapes,
    entropic_objective,
    finalize,
)

ABSORB_THRESHOLD = 50.0


@dataclass
class ScalingState:
    """Scalings such that P = diag(u) exp(lam (alpha + beta - M)) diag(v)."""

    u: np.ndarray
    v: np.ndarray
    log_u: np.ndarray
    log_v: np.ndarray
    absorbed: bool = False


def _prepare(mu, nu, M, opts):
    mu, nu = as_weights(mu), as_weights(nu)
    M = as_cost(M)
    check_shapes(mu, nu, M)
    opts = opts or SolverOptions()
    check_lambda(opts.lam)
    return mu, nu, M, opts


def sinkhorn(mu, nu, M, opts: SolverOptions | None = None):
    """Alternate row/column scaling of exp(-lam M).

    Underflow of the kernel or overflow of the scalings is not an exception:
    the result comes back with ``converged=False`` and ``info['breakdown']``.
    """
    mu, nu, M, opts = _prepare(mu, nu, M, opts)
    lam = opts.lam
    rows, cols = mu > 0, nu > 0
    K = np.exp(-lam * M)
    u = rows.astype(float)
    v = cols.astype(float)
    breakdown = None
    converged = False
    it = 0
    with np.errstate(all="ignore"):
        Kv = K @ v
        for it in range(1, opts.max_iter + 1):
            u = np.where(rows, mu / Kv, 0.0)
            KTu = K.T @ u
            v = np.where(cols, nu / KTu, 0.0)
            bad_u = ~np.isfinite(u[rows]) | (u[rows] == 0)
            bad_v = ~np.isfinite(v[cols]) | (v[cols] == 0)
            if bad_u.any() or bad_v.any():
                breakdown = (
                    f"scaling factor became 0/NaN/inf at iteration {it} "
                    f"({int(bad_u.sum())} rows, {int(bad_v.sum())} columns)"
                )
                break
            Kv = K @ v
            viol = np.abs(u * Kv - mu)[rows].sum() + np.abs(v * KTu - nu)[cols].sum()
            if not np.isfinite(viol):
                breakdown = f"marginals became non-finite at iteration {it}"
                break
            if viol <= opts.tol:
                converged = True
                break
        P = u[:, None] * K * v[None, :]
    info = {"u": u, "v": v}
    if breakdown:
        info["breakdown"] = breakdown
        info["note"] = "NumericalBreakdown"
        objective = float("nan")
    else:
        objective = entropic_objective(np.maximum(P, 0.0), M, lam)
    return finalize(P, M, mu, nu, objective=objective, iterations=it,
                    converged=converged, method="sinkhorn", lam=lam, **info)


def _stabilized_stage(mu, nu, M, lam, alpha, beta, tol, max_iter, threshold):
    """Scaling iterations on the kernel exp(lam (alpha + beta - M)) with absorption."""
    rows, cols = mu > 0, nu > 0
    log_mu = np.log(np.where(rows, mu, 1.0))
    log_nu = np.log(np.where(cols, nu, 1.0))

    def kernel():
        return np.exp(lam * (alpha[:, None] + beta[None, :] - M))

    K = kernel()
    u = rows.astype(float)
    v = cols.astype(float)
    absorptions = 0
    converged = False
    it = 0
    with np.errstate(all="ignore"):
        Kv = K @ v
        for it in range(1, max_iter + 1):
            if np.any(Kv[rows] == 0) or not np.all(np.isfinite(Kv)):
                # redo the half-step in the log domain with v folded into beta
                beta = beta + np.where(cols, np.log(v), 0.0) / lam
                v = cols.astype(float)
                lse = logsumexp(lam * (beta[None, :] - M), axis=1, b=cols[None, :].astype(float))
                alpha = np.where(rows, (log_mu - lse) / lam, alpha)
                u = rows.astype(float)
                K = kernel()
                absorptions += 1
            else:
                u = np.where(rows, mu / Kv, 0.0)
            KTu = K.T @ u
            if np.any(KTu[cols] == 0) or not np.all(np.isfinite(KTu)):
                alpha = alpha + np.where(rows, np.log(u), 0.0) / lam
                u = rows.astype(float)
                lse = logsumexp(lam * (alpha[:, None] - M), axis=0, b=rows[:, None].astype(float))
                beta = np.where(cols, (log_nu - lse) / lam, beta)
                v = cols.astype(float)
                K = kernel()
                absorptions += 1
                KTu = K.T @ u
            else:
                v = np.where(cols, nu / KTu, 0.0)
            col_viol = np.abs(v * KTu - nu)[cols].sum()
            lu = np.abs(np.log(u[rows])).max(initial=0.0)
            lv = np.abs(np.log(v[cols])).max(initial=0.0)
            if max(lu, lv) > threshold:
                alpha = alpha + np.where(rows, np.log(u), 0.0) / lam
                beta = beta + np.where(cols, np.log(v), 0.0) / lam
                u = rows.astype(float)
                v = cols.astype(float)
                K = kernel()
                absorptions += 1
            Kv = K @ v
            row_viol = np.abs(u * Kv - mu)[rows].sum()
            if row_viol + col_viol <= tol:
                converged = True
                break
    return alpha, beta, u, v, K, it, converged, absorptions


def lambda_schedule(lam, cost_range, start_range=100.0, factor=4.0):
    """Geometric lambda ladder ending at ``lam`` whose first rung has lam * range <= start_range."""
    if lam * cost_range <= start_range:
        return [lam]
    steps = int(np.ceil(np.log(lam * cost_range / start_range) / np.log(factor)))
    return [lam / factor**s for s in range(steps, -1, -1)]


def sinkhorn_stabilized(mu, nu, M, opts: SolverOptions | None = None,
                        absorb_threshold: float = ABSORB_THRESHOLD,
                        eps_scaling: bool = True, stage_tol: float = 1e-5):
    """Sinkhorn with single-threshold log-domain absorption.

    Dual potentials ``alpha``/``beta`` (cost units) are folded into the kernel
    exponent whenever a scaling leaves ``[-absorb_threshold, absorb_threshold]``
    in log scale.  A half-step whose kernel sums underflow is redone in the log
    domain (logsumexp) and absorbed immediately, so scalings never overflow.

    With ``eps_scaling`` the duals are warm-started along a geometric ladder of
    smaller lambdas (each rung solved to ``stage_tol``); the last rung is the
    requested problem, so the fixed point is unchanged.  Without it, large
    ``lam * max|M|`` makes plain dual ascent crawl.
    """
    mu, nu, M, opts = _prepare(mu, nu, M, opts)
    lam = opts.lam
    rows, cols = mu > 0, nu > 0
    alpha = np.zeros(mu.size)
    beta = np.zeros(nu.size)
    ladder = lambda_schedule(lam, float(M.max() - M.min())) if eps_scaling else [lam]
    total_it = 0
    absorptions = 0
    for rung in ladder:
        final = rung == ladder[-1]
        alpha, beta, u, v, K, it, converged, absorbed = _stabilized_stage(
            mu, nu, M, rung, alpha, beta,
            opts.tol if final else max(stage_tol, opts.tol),
            opts.max_iter, absorb_threshold,
        )
        total_it += it
        absorptions += absorbed
        if not final:
            with np.errstate(divide="ignore"):
                alpha = alpha + np.where(rows, np.log(u), 0.0) / rung
                beta = beta + np.where(cols, np.log(v), 0.0) / rung
    P = u[:, None] * K * v[None, :]
    with np.errstate(divide="ignore"):
        log_u = np.where(rows, np.log(np.where(rows, u, 1.0)) + lam * alpha, -np.inf)
        log_v = np.where(cols, np.log(np.where(cols, v, 1.0)) + lam * beta, -np.inf)
    state = ScalingState(u=u, v=v, log_u=log_u, log_v=log_v, absorbed=absorptions > 0)
    finite = bool(np.all(np.isfinite(P)))
    objective = entropic_objective(np.maximum(P, 0.0), M, lam) if finite else float("nan")
    return finalize(
        P, M, mu, nu, objective=objective, iterations=total_it,
        converged=converged and finite, method="sinkhorn-stab", lam=lam,
        alpha=alpha, beta=beta, log_u=state.log_u, log_v=state.log_v,
        absorptions=absorptions, lambda_ladder=ladder,
        stabilization="single-threshold log-domain absorption",
    )
