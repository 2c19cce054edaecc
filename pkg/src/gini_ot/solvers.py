"""One entry point for every solver, keyed by method tag."""

from __future__ import annotations

from .entropic import sinkhorn, sinkhorn_stabilized
from .errors import InputError
from .exact import solve_lp
from .gini import GotProblem, got_frank_wolfe, got_mirror_descent, got_qp
from .measures import METHODS, SolverOptions, as_cost, as_weights, check_shapes

# per-method budgets used when the caller gives no options
DEFAULT_BUDGETS = {
    "lp": {},
    "sinkhorn": {"tol": 1e-9, "max_iter": 100_000},
    "sinkhorn-stab": {"tol": 1e-9, "max_iter": 1_000_000},
    "got-qp": {"tol": 1e-12, "max_iter": 10_000},
    "got-fw": {"tol": 1e-12, "max_iter": 20_000},
    "got-md": {"tol": 1e-11, "max_iter": 100_000},
}


def check_method(method: str) -> str:
    if method not in METHODS:
        raise InputError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    return method


def default_options(method: str, lam: float = 1.0, **overrides) -> SolverOptions:
    """SolverOptions carrying the method's default budget, then ``overrides``."""
    params = dict(DEFAULT_BUDGETS[check_method(method)])
    params.update({k: v for k, v in overrides.items() if v is not None})
    return SolverOptions(lam=lam, **params)


def solve(mu, nu, M, method: str = "lp", opts: SolverOptions | None = None):
    """Dispatch to the solver for ``method``; ``opts`` defaults to the method's budget."""
    check_method(method)
    mu, nu = as_weights(mu), as_weights(nu)
    M = as_cost(M)
    check_shapes(mu, nu, M)
    if method == "lp":
        return solve_lp(mu, nu, M)
    opts = opts or default_options(method)
    if method == "sinkhorn":
        return sinkhorn(mu, nu, M, opts)
    if method == "sinkhorn-stab":
        return sinkhorn_stabilized(mu, nu, M, opts)
    problem = GotProblem(mu, nu, M, opts.lam)
    if method == "got-qp":
        return got_qp(problem, opts)
    if method == "got-fw":
        return got_frank_wolfe(problem, opts)
    return got_mirror_descent(problem, opts)
