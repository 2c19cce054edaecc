"""Gini-regularized OT.

Minimizes ``<P, M> - G(P) / lam`` over the transport polytope, where
``G(P) = sum P (1 - P)``.  Equivalently ``f(P) = <P, M_lam> + ||P||_F^2 / lam``
with ``M_lam = M - 1/lam``.  Completing the square,

    f(P) = ||P + (lam / 2) M_lam||_F^2 / lam - (lam / 4) ||M_lam||_F^2,

so the minimizer is the Euclidean projection of ``-(lam / 2) M_lam`` onto the
polytope.  Three solvers are provided: that projection (``got_qp``),
Frank-Wolfe (``got_frank_wolfe``) and entropic mirror descent
(``got_mirror_descent``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import logsumexp

from .errors import NonPositiveInput, ShapeMismatch, TooLarge, ZeroInitEntry
from .exact import TransportSimplex
from .measures import (
    SolverOptions,
    as_cost,
    as_weights,
    check_lambda,
    check_shapes,
    finalize,
    gini_objective,
    marginal_violation,
)


@dataclass(frozen=True, eq=False)
class GotProblem:
    mu: np.ndarray
    nu: np.ndarray
    M: np.ndarray
    lam: float

    def __post_init__(self):
        mu, nu = as_weights(self.mu), as_weights(self.nu)
        M = as_cost(self.M)
        check_shapes(mu, nu, M)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "lam", check_lambda(self.lam))

    @cached_property
    def M_lambda(self) -> np.ndarray:
        return self.M - 1.0 / self.lam

    def with_lambda(self, lam) -> "GotProblem":
        return GotProblem(self.mu, self.nu, self.M, lam)

    def objective(self, P) -> float:
        return float(np.sum(P * self.M_lambda) + np.sum(P * P) / self.lam)

    def gradient(self, P) -> np.ndarray:
        return self.M_lambda + (2.0 / self.lam) * P

    def target(self) -> np.ndarray:
        """Point whose projection onto U(mu, nu) is the minimizer."""
        return -0.5 * self.lam * self.M_lambda


def make_problem(mu, nu, M, lam) -> GotProblem:
    return GotProblem(mu, nu, M, lam)


@dataclass
class _Support:
    """Rows/columns with positive mass; zero-mass atoms are solved away."""

    rows: np.ndarray
    cols: np.ndarray
    shape: tuple = field(default=(0, 0))

    @classmethod
    def of(cls, mu, nu):
        return cls(np.flatnonzero(mu > 0), np.flatnonzero(nu > 0), (mu.size, nu.size))

    def restrict(self, A):
        return A[np.ix_(self.rows, self.cols)]

    def embed(self, A):
        out = np.zeros(self.shape)
        out[np.ix_(self.rows, self.cols)] = A
        return out


# --------------------------------------------------------------------------
# Euclidean projection onto U(mu, nu)

# residual accepted when Newton stalls at the floating-point floor
FLOOR_TOL = 1e-9
STALL_ZONE = 1e-6


def _row_shift(Y, mass):
    """Per-row t with sum_j max(Y_ij + t, 0) = mass_i (sort-based, exact)."""
    n, k = Y.shape
    Ys = -np.sort(-Y, axis=1)
    css = np.cumsum(Ys, axis=1)
    idx = np.arange(1, k + 1)
    # candidate shifts when the top-r entries are active
    t = (mass[:, None] - css) / idx
    valid = Ys + t >= 0
    r = k - 1 - np.argmax(valid[:, ::-1], axis=1)
    return t[np.arange(n), r]


def _affine_projection(X, mu, nu):
    n, k = X.shape
    r = mu - X.sum(axis=1)
    c = nu - X.sum(axis=0)
    return X + r[:, None] / k + c[None, :] / n - r.sum() / (n * k)


def project_dykstra(Y, mu, nu, tol=1e-9, max_sweeps=100_000, increment_tol=1e-10):
    """Dykstra alternating projections: affine marginal set, then the orthant.

    The affine set needs no correction term; only the orthant step carries one.
    """
    X = Y.copy()
    Q = np.zeros_like(Y)
    P = np.maximum(X, 0.0)
    for sweep in range(1, max_sweeps + 1):
        A = _affine_projection(X, mu, nu)
        P_new = np.maximum(A + Q, 0.0)
        Q = A + Q - P_new
        inc = np.abs(P_new - P).max()
        P = X = P_new
        if marginal_violation(P, mu, nu) <= tol and inc <= increment_tol:
            return P, sweep, True
    return P, max_sweeps, False


def _dual_grad(Y, alpha, beta, mu, nu):
    Z = Y + alpha[:, None] + beta[None, :]
    P = np.maximum(Z, 0.0)
    return np.concatenate([mu - P.sum(axis=1), nu - P.sum(axis=0)]), Z > 0, P


def _line_search(Y, alpha, beta, d, mu, nu, bisections=60):
    """Exact maximizer of the concave dual along ``d`` on [0, 1] (bisection on the slope)."""
    n = mu.size

    def slope(t):
        g, _, _ = _dual_grad(Y, alpha + t * d[:n], beta + t * d[n:], mu, nu)
        return float(g @ d)

    if slope(1.0) >= 0.0:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(bisections):
        mid = 0.5 * (lo + hi)
        if slope(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def project_newton(Y, mu, nu, tol=1e-12, max_iter=500, alpha=None, beta=None, stall=8):
    """Semismooth Newton ascent on the dual of min ||P - Y||^2 / 2 over U(mu, nu).

    The primal solution is P = max(Y + alpha 1^T + 1 beta^T, 0).  The
    generalized Hessian is the Laplacian of the bipartite graph of active
    cells; a tiny ridge handles its null space and an exact line search
    globalizes the iteration.  Stops once the marginal residual is <= tol or
    has not improved for ``stall`` iterations (floating-point floor).
    """
    n, k = Y.shape
    alpha = _row_shift(Y, mu) if alpha is None else np.asarray(alpha, dtype=float).copy()
    beta = np.zeros(k) if beta is None else np.asarray(beta, dtype=float).copy()
    best, since = np.inf, 0
    it = 0
    for it in range(1, max_iter + 1):
        g, act, P = _dual_grad(Y, alpha, beta, mu, nu)
        res = np.abs(g).sum()
        if res <= tol:
            return P, alpha, beta, it, True
        if res < 0.5 * best:
            best, since = res, 0
        elif res <= STALL_ZONE:
            # short steps far from the solution are normal while the active
            # set changes; only near the rounding floor does no progress mean done
            since += 1
            if since >= stall:
                break
        A = act.astype(float)
        H = np.zeros((n + k, n + k))
        H[:n, :n] = np.diag(A.sum(axis=1))
        H[n:, n:] = np.diag(A.sum(axis=0))
        H[:n, n:] = A
        H[n:, :n] = A.T
        H[np.diag_indices(n + k)] += 1e-10 * (1.0 + H.diagonal().max())
        d = np.linalg.solve(H, g)
        t = _line_search(Y, alpha, beta, d, mu, nu)
        alpha = alpha + t * d[:n]
        beta = beta + t * d[n:]
    P = np.maximum(Y + alpha[:, None] + beta[None, :], 0.0)
    return P, alpha, beta, it, marginal_violation(P, mu, nu) <= max(tol, FLOOR_TOL)


def project_polytope(Y, mu, nu, method="newton", tol=1e-12, max_iter=None, **kw):
    """Frobenius projection of ``Y`` onto U(mu, nu); returns (P, iterations, converged)."""
    Y = np.asarray(Y, dtype=float)
    mu, nu = np.asarray(mu, dtype=float), np.asarray(nu, dtype=float)
    if Y.shape != (mu.size, nu.size):
        raise ShapeMismatch(f"matrix shape {Y.shape} vs measures ({mu.size}, {nu.size})")
    if method == "newton":
        P, _, _, it, ok = project_newton(Y, mu, nu, tol=tol, max_iter=max_iter or 500, **kw)
        return P, it, ok
    if method == "dykstra":
        return project_dykstra(Y, mu, nu, tol=max(tol, 1e-9), max_sweeps=max_iter or 100_000)
    raise ValueError(f"unknown projection method {method!r}")


def reduced_cost(mu, nu, M):
    """M - u - v for optimal LP duals (u, v): >= 0, and 0 on the LP basis."""
    lp = TransportSimplex(mu, nu)
    lp.solve(M)
    return np.maximum(M - lp.u[:, None] - lp.v[None, :], 0.0)


def continuation_ladder(lam, cost_range, factor=2.0):
    """Doubling lambdas from ~1/cost_range up to ``lam``."""
    if cost_range <= 0 or lam * cost_range <= 1.0:
        return [lam]
    steps = int(np.ceil(np.log(lam * cost_range) / np.log(factor)))
    return [lam / factor**s for s in range(steps, -1, -1)]


def got_qp(problem: GotProblem, opts: SolverOptions | None = None, method="newton", init=None):
    """Exact Gini-OT solution as a Euclidean projection.

    Row/column shifts of the target leave the projection unchanged, so the
    Newton path projects ``-(lam / 2) R`` with ``R`` the LP reduced cost: the
    cells that end up active have small entries, which avoids cancellation
    when ``lam * max|M|`` is large.  Duals are warm-started along a doubling
    lambda ladder (the scaled duals ``2 alpha / lam`` barely move between rungs).
    ``init`` gives starting duals ``(alpha, beta)`` for the first rung; with
    ``opts.seed`` set and no ``init`` a random dual start is drawn.
    """
    opts = opts or SolverOptions(lam=problem.lam)
    lam = problem.lam
    sup = _Support.of(problem.mu, problem.nu)
    mu, nu = problem.mu[sup.rows], problem.nu[sup.cols]
    M = sup.restrict(problem.M)
    if method == "newton":
        R = reduced_cost(mu, nu, M)
        ladder = [lam] if init is not None else continuation_ladder(lam, float(R.max()))
        alpha = beta = None
        if init is not None:
            alpha, beta = init
        elif opts.seed is not None:
            rng = np.random.default_rng(opts.seed)
            spread = 1.0 + 0.5 * ladder[0] * float(R.max())
            alpha, beta = rng.normal(0, spread, mu.size), rng.normal(0, spread, nu.size)
        it = 0
        prev = ladder[0]
        budget = min(opts.max_iter, 10_000)
        for rung in ladder:
            if alpha is not None and rung != prev:
                alpha, beta = alpha * (rung / prev), beta * (rung / prev)
            final = rung == ladder[-1]
            P, alpha, beta, used, ok = project_newton(
                -0.5 * rung * R, mu, nu, tol=min(opts.tol, 1e-12) if final else 1e-9,
                max_iter=max(budget - it, 1), alpha=alpha, beta=beta)
            it += used
            prev = rung
        info = {"projection": "semismooth-newton", "lambda_ladder": ladder}
    else:
        Y = sup.restrict(problem.target())
        P, it, ok = project_dykstra(Y, mu, nu, tol=opts.tol, max_sweeps=opts.max_iter)
        info = {"projection": "dykstra"}
    P = sup.embed(P)
    # half squared distance to the unshifted target (equals the objective up to a constant)
    info["projection_distance"] = float(0.5 * np.sum((P - problem.target()) ** 2))
    return finalize(P, problem.M, problem.mu, problem.nu,
                    objective=gini_objective(P, problem.M, lam),
                    iterations=it, converged=ok, method="got-qp", lam=lam, **info)


# --------------------------------------------------------------------------
# Frank-Wolfe


def _face_minimizer(mask, M_lam, lam, mu, nu):
    """Minimizer of the objective over plans in the affine hull of U restricted to ``mask``.

    On the face, P = (lam / 2)(a_i + b_j - M_lam) and the marginal constraints
    give a bipartite Laplacian system in (a, b); sign constraints are dropped.
    """
    n, k = mask.shape
    W = mask.astype(float)
    H = np.block([[np.diag(W.sum(axis=1)), W], [W.T, np.diag(W.sum(axis=0))]])
    WM = W * M_lam
    rhs = np.concatenate([2.0 * mu / lam + WM.sum(axis=1), 2.0 * nu / lam + WM.sum(axis=0)])
    sol = np.linalg.lstsq(H, rhs, rcond=None)[0]
    return W * (0.5 * lam) * (sol[:n, None] + sol[None, n:] - M_lam)


def _face_step(P, S, M_lam, lam, mu, nu):
    """Feasible exact-line-search step from P toward the face minimizer; None if no descent."""
    Q = _face_minimizer((P > 0) | (S > 0), M_lam, lam, mu, nu)
    if marginal_violation(Q, mu, nu) > 1e-12:
        return None
    d = Q - P
    dd = float(np.sum(d * d))
    slope = float(np.sum((M_lam + (2.0 / lam) * P) * d))
    if dd == 0.0 or slope >= 0.0:
        return None
    neg = d < 0
    gmax = min(1.0, float(np.min(P[neg] / -d[neg]))) if neg.any() else 1.0
    gamma = min(-lam * slope / (2.0 * dd), gmax)
    if gamma <= 0.0:
        return None
    return np.maximum(P + gamma * d, 0.0)


def got_frank_wolfe(problem: GotProblem, opts: SolverOptions | None = None, variant="away",
                    history=False, correct_every=10):
    """Conditional gradient with exact line search on the quadratic objective.

    The linear subproblem is an exact OT solve on the current gradient (signed
    costs allowed), warm-started from the previous basis.  ``variant="away"``
    adds away steps, which keep the FW step unchanged but let the iterate drop
    vertices it no longer needs; ``"vanilla"`` is the textbook update.
    With away steps, every ``correct_every`` iterations the iterate also moves
    (exact line search, kept feasible) toward the minimizer over its current
    face, which removes the zig-zag near the optimum.  Stops when the FW gap
    <g, P - S>, an upper bound on f(P) - f*, is <= tol.
    """
    opts = opts or SolverOptions(lam=problem.lam)
    lam = problem.lam
    sup = _Support.of(problem.mu, problem.nu)
    mu, nu = problem.mu[sup.rows], problem.nu[sup.cols]
    M_lam = sup.restrict(problem.M_lambda)
    lp = TransportSimplex(mu, nu)

    P = np.outer(mu, nu)
    atoms = {b"init": [P.copy(), 1.0]}
    f = float(np.sum(P * M_lam) + np.sum(P * P) / lam)
    fs = [f]
    gap = np.inf
    converged = False
    it = 0
    away_steps = drops = corrections = 0
    for it in range(1, opts.max_iter + 1):
        g = M_lam + (2.0 / lam) * P
        S = lp.solve(g)
        gap = float(np.sum(g * (P - S)))
        if gap <= opts.tol:
            converged = True
            it -= 1
            break
        if variant == "away" and len(atoms) > 1:
            key_v, (V, w_v) = max(atoms.items(), key=lambda kv: float(np.sum(g * kv[1][0])))
            away_gap = float(np.sum(g * (V - P)))
        else:
            away_gap = -np.inf
        if gap >= away_gap:
            d = S - P
            gmax = 1.0
            step_kind = "fw"
        else:
            d = P - V
            gmax = w_v / (1.0 - w_v)
            step_kind = "away"
        dd = float(np.sum(d * d))
        slope = float(np.sum(g * d))
        gamma = min(max(-lam * slope / (2.0 * dd), 0.0), gmax) if dd > 0 else 0.0
        if step_kind == "fw":
            for a in atoms.values():
                a[1] *= 1.0 - gamma
            key = np.round(S, 15).tobytes()
            if gamma == 1.0:
                atoms = {key: [S, 1.0]}
            elif key in atoms:
                atoms[key][1] += gamma
            else:
                atoms[key] = [S, gamma]
        else:
            away_steps += 1
            for a in atoms.values():
                a[1] *= 1.0 + gamma
            atoms[key_v][1] -= gamma
            if gamma >= gmax:
                del atoms[key_v]
                drops += 1
        atoms = {k_: a for k_, a in atoms.items() if a[1] > 0}
        P = P + gamma * d
        stuck = gamma == 0.0
        if variant == "away" and correct_every and it % correct_every == 0:
            moved = _face_step(P, S, M_lam, lam, mu, nu)
            if moved is not None:
                P = moved
                atoms = {b"face": [P.copy(), 1.0]}
                corrections += 1
                stuck = False
        f_new = float(np.sum(P * M_lam) + np.sum(P * P) / lam)
        fs.append(f_new)
        if stuck:
            # line search cannot move: gap is at the floating-point floor
            converged = gap <= max(opts.tol, 1e-13 * (1.0 + abs(f_new)))
            break
    P_full = sup.embed(np.maximum(P, 0.0))
    info = {"fw_gap": gap, "away_steps": away_steps, "dropped_atoms": drops,
            "active_atoms": len(atoms), "variant": variant, "lp_pivots": lp.pivots,
            "face_corrections": corrections}
    if history:
        info["objective_history"] = np.array(fs)
    return finalize(P_full, problem.M, problem.mu, problem.nu,
                    objective=gini_objective(P_full, problem.M, lam), iterations=it,
                    converged=converged, method="got-fw", lam=lam, **info)


# --------------------------------------------------------------------------
# Mirror descent


def _kl_newton(logK, mu, nu, tol, a=None, b=None, max_iter=100):
    """Newton on the dual of the KL projection: find a, b with exp(a) K exp(b) in U(mu, nu).

    Minimizes sum(K exp(a + b)) - <mu, a> - <nu, b>; its Hessian is the
    weighted bipartite Laplacian of the current plan.  Takes log K.
    """
    n, k = logK.shape
    a = np.zeros(n) if a is None else a.copy()
    b = np.zeros(k) if b is None else b.copy()

    def phi(a, b):
        with np.errstate(over="ignore", invalid="ignore"):
            P = np.exp(logK + a[:, None] + b[None, :])
            return float(P.sum() - mu @ a - nu @ b), P

    val, P = phi(a, b)
    for _ in range(max_iter):
        r, c = P.sum(axis=1), P.sum(axis=0)
        g = np.concatenate([r - mu, c - nu])
        if np.abs(g).sum() <= tol:
            break
        H = np.zeros((n + k, n + k))
        H[:n, :n] = np.diag(r)
        H[n:, n:] = np.diag(c)
        H[:n, n:] = P
        H[n:, :n] = P.T
        H[np.diag_indices(n + k)] += 1e-12 * (1.0 + H.diagonal().max())
        d = -np.linalg.solve(H, g)
        slope = float(g @ d)
        res = np.abs(g).sum()
        step = 1.0
        for _ in range(60):
            new_val, new_P = phi(a + step * d[:n], b + step * d[n:])
            # near the optimum value changes drop below rounding; fall back to the residual
            if np.isfinite(new_val) and (
                    new_val <= val + 1e-4 * step * slope
                    or np.abs(new_P.sum(axis=1) - mu).sum() + np.abs(new_P.sum(axis=0) - nu).sum()
                    < (1.0 - 1e-4 * step) * res):
                break
            step *= 0.5
        else:
            break
        a, b = a + step * d[:n], b + step * d[n:]
        val, P = new_val, new_P
    return P, a, b


def _kl_project(K, mu, nu, a, b, inner_iters, tol, newton_after):
    """KL projection of K >= 0 from log-scalings (a, b); returns (P, a, b).

    Every row and column of K needs a positive entry.
    """
    ea, eb = np.exp(a), np.exp(b)
    Kb = K @ eb
    sweeps = min(inner_iters, newton_after) if newton_after else inner_iters
    for _ in range(sweeps):
        ea = mu / Kb
        Ka = K.T @ ea
        eb = nu / Ka
        Kb = K @ eb
        # columns are exact after the column update; only rows can be off
        if np.abs(ea * Kb - mu).sum() <= tol:
            break
    with np.errstate(divide="ignore"):
        a, b = np.log(ea), np.log(eb)
    P = ea[:, None] * K * eb[None, :]
    if newton_after and marginal_violation(P, mu, nu) > tol:
        with np.errstate(divide="ignore"):
            P, a, b = _kl_newton(np.log(K), mu, nu, tol, a, b)
    return P, a, b


def _kl_project_log(logK, mu, nu, sweeps, tol):
    """Log-domain KL projection for kernels whose entries span more than the float range."""
    log_mu, log_nu = np.log(mu), np.log(nu)
    a, b = np.zeros(mu.size), np.zeros(nu.size)
    for _ in range(sweeps):
        a = log_mu - logsumexp(logK + b[None, :], axis=1)
        b = log_nu - logsumexp(logK + a[:, None], axis=0)
        if np.abs(np.exp(a + logsumexp(logK + b[None, :], axis=1)) - mu).sum() <= tol:
            break
    P = np.exp(logK + a[:, None] + b[None, :])
    if marginal_violation(P, mu, nu) > tol:
        P, a, b = _kl_newton(logK, mu, nu, tol, a, b)
    return P, a, b


def bregman_project(P_tilde, mu, nu, inner_iters=1000, tol=1e-10, newton_after=50):
    """KL projection onto U(mu, nu) by alternating row and column rescaling.

    If the rescaling has not reached ``tol`` after ``newton_after`` sweeps
    (nearly sparse input makes it crawl) the remaining work is done by Newton
    steps on the projection's dual, which yields the same projection.
    """
    P = np.array(P_tilde, dtype=float)
    mu, nu = as_weights(mu), as_weights(nu)
    if P.shape != (mu.size, nu.size):
        raise ShapeMismatch(f"matrix shape {P.shape} vs measures ({mu.size}, {nu.size})")
    if np.any(P < 0) or not np.all(np.isfinite(P)):
        raise NonPositiveInput("Bregman projection needs a finite non-negative matrix")
    rows, cols = mu > 0, nu > 0
    if np.any(P[rows].sum(axis=1) <= 0) or np.any(P[:, cols].sum(axis=0) <= 0):
        raise NonPositiveInput("a row or column with positive marginal has no mass")
    out = np.zeros_like(P)
    K = P[np.ix_(rows, cols)]
    if marginal_violation(P, mu, nu) <= tol:
        out[np.ix_(rows, cols)] = K
        return out
    Q, _, _ = _kl_project(K, mu[rows], nu[cols], np.zeros(K.shape[0]), np.zeros(K.shape[1]),
                          inner_iters, tol, newton_after)
    out[np.ix_(rows, cols)] = Q
    return out


def default_step_size(lam: float, rule: str = "inverse-lipschitz") -> float:
    """Mirror-descent step.

    ``inverse-lipschitz``: 1/L with L = 2/lam, the smoothness constant of the
    objective relative to the negative entropy on the simplex.
    ``quadratic``: lam**2 / 4 clipped to [1e-3, 1] (more conservative).
    """
    if rule == "quadratic":
        return float(np.clip(lam * lam / 4.0, 1e-3, 1.0))
    return float(np.clip(lam / 2.0, 1e-3, 1e3))


def got_mirror_descent(problem: GotProblem, opts: SolverOptions | None = None,
                       inner_iters=1000, history=False):
    """Multiplicative (negative-entropy mirror map) gradient steps + KL projection.

    Stops when |f(P_{t+1}) - f(P_t)| <= tol.
    """
    opts = opts or SolverOptions(lam=problem.lam)
    lam = problem.lam
    eta = opts.step_size or default_step_size(lam)
    sup = _Support.of(problem.mu, problem.nu)
    mu, nu = problem.mu[sup.rows], problem.nu[sup.cols]
    M_lam = sup.restrict(problem.M_lambda)
    P = np.outer(mu, nu)
    if np.any(P <= 0):
        raise ZeroInitEntry("initial product plan has a zero entry")
    f = float(np.sum(P * M_lam) + np.sum(P * P) / lam)
    fs = [f]
    worst = 0.0
    converged = False
    it = 0
    # the iterate is kept as log P so entries never underflow; a, b are the
    # accumulated log-scalings of the KL projection, which settle as the iterates do
    log_P = np.log(P)
    a, b = np.zeros(mu.size), np.zeros(nu.size)
    za, zb = np.zeros(mu.size), np.zeros(nu.size)
    log_fallbacks = 0
    for it in range(1, opts.max_iter + 1):
        g = M_lam + (2.0 / lam) * P
        # the previous step's scalings are folded in before exponentiating, so
        # the kernel is already close to a plan and nothing overflows
        L = log_P - eta * g + a[:, None] + b[None, :]
        # shift so every row and column holds an entry equal to 1
        r = L.max(axis=1)
        L -= r[:, None]
        c = L.max(axis=0)
        L -= c[None, :]
        P, da, db = _kl_project(np.exp(L), mu, nu, za, zb, inner_iters, 1e-10, 50)
        if not marginal_violation(P, mu, nu) <= 1e-10:
            # underflow left the kernel without a feasible support
            P, da, db = _kl_project_log(L, mu, nu, 50, 1e-10)
            log_fallbacks += 1
        log_P = L + da[:, None] + db[None, :]
        a, b = a + da - r, b + db - c
        worst = max(worst, marginal_violation(P, mu, nu))
        f_new = float(np.sum(P * M_lam) + np.sum(P * P) / lam)
        fs.append(f_new)
        if abs(f_new - f) <= opts.tol:
            converged = True
            f = f_new
            break
        f = f_new
    P_full = sup.embed(P)
    info = {"step_size": eta, "max_iterate_violation": worst, "log_domain_projections": log_fallbacks}
    if history:
        info["objective_history"] = np.array(fs)
    return finalize(P_full, problem.M, problem.mu, problem.nu,
                    objective=gini_objective(P_full, problem.M, lam), iterations=it,
                    converged=converged, method="got-md", lam=lam, **info)


# --------------------------------------------------------------------------
# Small-instance oracle


def qp_active_set_oracle(problem: GotProblem, max_cells=16):
    """Minimizer of the Gini objective by enumerating candidate supports.

    For each support S the KKT system P_S = Y_S + alpha_i + beta_j with the
    marginal constraints is solved by least squares; the first S (by size)
    whose solution is non-negative on S and dual feasible off S is optimal.
    Independent of the projection solvers; exponential in n * k.
    """
    mu, nu = problem.mu, problem.nu
    n, k = mu.size, nu.size
    if n * k > max_cells:
        raise TooLarge(f"oracle limited to n*k <= {max_cells}, got {n * k}")
    Y = problem.target()
    cells = [(i, j) for i in range(n) for j in range(k)]
    need_r = mu > 0
    need_c = nu > 0
    for size in range(1, n * k + 1):
        for S in itertools.combinations(cells, size):
            rows = np.zeros(n, dtype=bool)
            cols = np.zeros(k, dtype=bool)
            for i, j in S:
                rows[i] = cols[j] = True
            if np.any(need_r & ~rows) or np.any(need_c & ~cols):
                continue
            # unknowns: alpha (n), beta (k); equations: marginals
            A = np.zeros((n + k, n + k))
            rhs = np.concatenate([mu.copy(), nu.copy()])
            for i, j in S:
                A[i, i] += 1
                A[i, n + j] += 1
                A[n + j, i] += 1
                A[n + j, n + j] += 1
                rhs[i] -= Y[i, j]
                rhs[n + j] -= Y[i, j]
            x, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            if np.abs(A @ x - rhs).max() > 1e-10:
                continue
            Z = Y + x[:n, None] + x[None, n:]
            mask = np.zeros((n, k), dtype=bool)
            for c in S:
                mask[c] = True
            if np.any(Z[mask] < -1e-12) or np.any(Z[~mask] > 1e-12):
                continue
            P = np.where(mask, np.maximum(Z, 0.0), 0.0)
            return finalize(P, problem.M, mu, nu,
                            objective=gini_objective(P, problem.M, problem.lam),
                            iterations=size, converged=True, method="qp-oracle",
                            lam=problem.lam)
    raise RuntimeError("no KKT point found")
