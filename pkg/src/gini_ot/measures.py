"""Core types: discrete measures, plans, costs, regularizers and results.

Plans and cost matrices are plain 2-D float ``numpy`` arrays; the helpers
here validate them at API boundaries.  Row sums of an ``n x k`` plan give the
source measure (length ``n``), column sums the target measure (length ``k``).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from .errors import (
    EmptyInput,
    InputError,
    NegativeWeight,
    NonPositiveLambda,
    ShapeMismatch,
    ZeroTotalMass,
)

METHODS = ("lp", "sinkhorn", "sinkhorn-stab", "got-qp", "got-fw", "got-md")


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """A probability vector with optional labels and (lat, lon) coordinates."""

    weights: np.ndarray
    labels: Optional[tuple] = None
    coords: Optional[tuple] = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        for name in ("labels", "coords"):
            meta = getattr(self, name)
            if meta is not None:
                meta = tuple(tuple(c) if name == "coords" else c for c in meta)
                if len(meta) != w.size:
                    raise ShapeMismatch(
                        f"{name} has length {len(meta)}, expected {w.size}"
                    )
                object.__setattr__(self, name, meta)

    def __len__(self):
        return self.weights.size

    @property
    def size(self) -> int:
        return self.weights.size


def make_measure(weights, labels=None, coords=None) -> DiscreteMeasure:
    """Normalize non-negative ``weights`` onto the probability simplex.

    Raw counts are accepted; a single division by the total is applied.
    Zero-mass atoms are kept so that indices stay aligned with labels.
    """
    w = np.asarray(weights, dtype=float).ravel()
    if w.size == 0:
        raise EmptyInput("measure has no atoms")
    if not np.all(np.isfinite(w)):
        raise InputError("measure weights must be finite")
    if np.any(w < 0):
        raise NegativeWeight(f"negative weight at index {int(np.argmax(w < 0))}")
    total = w.sum()
    if total <= 0:
        raise ZeroTotalMass("weights sum to zero")
    return DiscreteMeasure(w / total, labels, coords)


def as_weights(mu) -> np.ndarray:
    """Weights of a DiscreteMeasure, or a validated + normalized raw vector."""
    if isinstance(mu, DiscreteMeasure):
        return mu.weights
    return make_measure(mu).weights


def as_cost(M, allow_negative: bool = False) -> np.ndarray:
    """Validate a 2-D cost matrix.

    Signed costs are only legal for internal subproblems (``allow_negative``).
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.size == 0:
        raise ShapeMismatch(f"cost matrix must be a non-empty 2-D array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError("cost matrix has non-finite entries")
    if not allow_negative and np.any(M < 0):
        raise InputError("cost matrix has negative entries")
    return M


def check_shapes(mu: np.ndarray, nu: np.ndarray, M: np.ndarray) -> None:
    if M.shape != (mu.size, nu.size):
        raise ShapeMismatch(
            f"cost shape {M.shape} does not match measures ({mu.size}, {nu.size})"
        )


def check_lambda(lam) -> float:
    if lam is None or not np.isfinite(lam) or lam <= 0:
        raise NonPositiveLambda(f"lambda must be > 0, got {lam}")
    return float(lam)


def transport_cost(P, M) -> float:
    """Frobenius inner product <P, M> = trace(P^T M)."""
    P = np.asarray(P, dtype=float)
    M = np.asarray(M, dtype=float)
    if P.shape != M.shape:
        raise ShapeMismatch(f"plan shape {P.shape} != cost shape {M.shape}")
    return float(np.sum(P * M))


def gini(P) -> float:
    """Gini impurity sum_ij P_ij (1 - P_ij)."""
    P = np.asarray(P, dtype=float)
    return float(np.sum(P * (1.0 - P)))


def entropy(P) -> float:
    """Shannon entropy -sum P log P (natural log, 0 log 0 = 0)."""
    P = np.asarray(P, dtype=float)
    pos = P[P > 0]
    return float(-np.sum(pos * np.log(pos)))


def got_objective_grad(P, M, lam):
    """Value and gradient of <P, M - 1/lam> + ||P||_F^2 / lam."""
    P = np.asarray(P, dtype=float)
    M = np.asarray(M, dtype=float)
    if P.shape != M.shape:
        raise ShapeMismatch(f"plan shape {P.shape} != cost shape {M.shape}")
    lam = check_lambda(lam)
    M_lam = M - 1.0 / lam
    value = float(np.sum(P * M_lam) + np.sum(P * P) / lam)
    return value, M_lam + (2.0 / lam) * P


def entropic_objective(P, M, lam) -> float:
    return transport_cost(P, M) - entropy(P) / lam


def gini_objective(P, M, lam) -> float:
    return transport_cost(P, M) - gini(P) / lam


@dataclass(frozen=True)
class MarginalReport:
    row_violation: float
    col_violation: float
    min_entry: float
    tol: float

    @property
    def total(self) -> float:
        return self.row_violation + self.col_violation

    @property
    def ok(self) -> bool:
        return self.total <= self.tol and self.min_entry >= -self.tol


def marginal_violation(P: np.ndarray, mu: np.ndarray, nu: np.ndarray) -> float:
    return float(np.abs(P.sum(axis=1) - mu).sum() + np.abs(P.sum(axis=0) - nu).sum())


def round_to_polytope(P, mu, nu) -> np.ndarray:
    """A plan in U(mu, nu) close to ``P`` (L1 change at most twice the marginal violation).

    Scales down over-full rows, then over-full columns, and spreads the
    remaining deficit as a rank-one correction.
    """
    P = np.maximum(np.asarray(P, dtype=float), 0.0)
    mu, nu = as_weights(mu), as_weights(nu)
    check_shapes(mu, nu, P)
    r = P.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        P = P * np.where(r > mu, mu / r, 1.0)[:, None]
        c = P.sum(axis=0)
        P = P * np.where(c > nu, nu / c, 1.0)[None, :]
    er = np.maximum(mu - P.sum(axis=1), 0.0)
    ec = np.maximum(nu - P.sum(axis=0), 0.0)
    total = ec.sum()
    if total > 0:
        P = P + np.outer(er, ec) / total
    return P


def validate_plan(P, mu, nu, tol: float = 1e-6) -> MarginalReport:
    """L1 marginal violations of ``P`` against ``mu`` (rows) and ``nu`` (columns)."""
    P = np.asarray(P, dtype=float)
    mu, nu = as_weights(mu), as_weights(nu)
    if P.shape != (mu.size, nu.size):
        raise ShapeMismatch(f"plan shape {P.shape} vs measures ({mu.size}, {nu.size})")
    return MarginalReport(
        row_violation=float(np.abs(P.sum(axis=1) - mu).sum()),
        col_violation=float(np.abs(P.sum(axis=0) - nu).sum()),
        min_entry=float(P.min()),
        tol=tol,
    )


@dataclass(frozen=True)
class SolverOptions:
    """Shared solver knobs; ``lam`` is the regularization weight lambda."""

    lam: float = 1.0
    max_iter: int = 10_000
    tol: float = 1e-9
    step_size: Optional[float] = None
    seed: Optional[int] = None

    def __post_init__(self):
        check_lambda(self.lam)
        if self.max_iter < 1:
            raise InputError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.tol > 0:
            raise InputError(f"tol must be > 0, got {self.tol}")
        if self.step_size is not None and not self.step_size > 0:
            raise InputError(f"step_size must be > 0, got {self.step_size}")

    def replace(self, **changes) -> "SolverOptions":
        return dataclasses.replace(self, **changes)


@dataclass
class SolveResult:
    plan: np.ndarray
    transport_cost: float
    objective: float
    iterations: int
    converged: bool
    marginal_violation: float
    method: str
    lam: Optional[float] = None
    info: dict = field(default_factory=dict)

    def to_dict(self, include_plan: bool = True) -> dict[str, Any]:
        out = {
            "method": self.method,
            "lambda": self.lam,
            "transport_cost": self.transport_cost,
            "objective": self.objective,
            "iterations": self.iterations,
            "converged": self.converged,
            "marginal_violation": self.marginal_violation,
        }
        out["info"] = {k: _jsonable(v) for k, v in self.info.items()}
        if include_plan:
            out["plan"] = self.plan.tolist()
        return out


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, np.generic):
        return v.item()
    return v


def finalize(P, M, mu, nu, *, objective, iterations, converged, method, lam=None, **info):
    """Clip tiny negatives, measure feasibility and pack a SolveResult."""
    P = np.asarray(P, dtype=float)
    if np.all(np.isfinite(P)):
        P = np.where(P < 0, 0.0, P)
        cost = transport_cost(P, M)
        viol = marginal_violation(P, mu, nu)
    else:
        cost = float("nan")
        viol = float("inf")
    return SolveResult(
        plan=P,
        transport_cost=cost,
        objective=float(objective),
        iterations=int(iterations),
        converged=bool(converged),
        marginal_violation=viol,
        method=method,
        lam=lam,
        info=info,
    )


def product_plan(mu: Sequence[float], nu: Sequence[float]) -> np.ndarray:
    return np.outer(as_weights(mu), as_weights(nu))
