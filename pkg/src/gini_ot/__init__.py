"""Discrete optimal transport: exact LP, entropic (Sinkhorn) and Gini-regularized solvers."""

from .bench import BenchRecord, SweepRecord, run_lambda_sweep, run_scaling_bench, summarize_bench
from .costs import GeoPoint, grid_cost, haversine_cost, random_uniform_cost
from .datasets import gaussian_pair, logit_normal_pair, make_dataset, uniform_pair
from .entropic import ScalingState, sinkhorn, sinkhorn_stabilized
from .errors import InputError, OTError, SolverError
from .exact import TransportSimplex, brute_force_oracle, solve_lp
from .forecast import EvalReport, LocaleTable, emd_score, load_locales
from .gini import (
    GotProblem,
    bregman_project,
    got_frank_wolfe,
    got_mirror_descent,
    got_qp,
    make_problem,
    project_polytope,
    qp_active_set_oracle,
)
from .measures import (
    METHODS,
    DiscreteMeasure,
    MarginalReport,
    SolveResult,
    SolverOptions,
    entropy,
    gini,
    got_objective_grad,
    make_measure,
    round_to_polytope,
    transport_cost,
    validate_plan,
)
from .solvers import default_options, solve

__version__ = "0.1.0"

__all__ = [
    "BenchRecord", "DiscreteMeasure", "EvalReport", "GeoPoint", "GotProblem", "InputError",
    "LocaleTable", "METHODS", "MarginalReport", "OTError", "ScalingState", "SolveResult",
    "SolverError", "SolverOptions", "SweepRecord", "TransportSimplex", "bregman_project",
    "brute_force_oracle", "default_options", "emd_score", "entropy", "gaussian_pair", "gini",
    "got_frank_wolfe", "got_mirror_descent", "got_objective_grad", "got_qp", "grid_cost",
    "haversine_cost", "load_locales", "logit_normal_pair", "make_dataset", "make_measure",
    "make_problem", "project_polytope", "qp_active_set_oracle", "random_uniform_cost",
    "round_to_polytope",     "run_lambda_sweep", "run_scaling_bench", "sinkhorn", "sinkhorn_stabilized", "solve",
    "solve_lp", "summarize_bench", "transport_cost", "uniform_pair", "validate_plan",
]
