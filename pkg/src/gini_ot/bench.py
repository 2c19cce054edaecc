"""Experiment harness: lambda sweeps against the exact LP, and runtime scaling.

Cells run on a thread pool capped by ``OT_THREADS`` (default 1).  Every cell
derives its own seed from the user seed and its key, and results are sorted
by key, so the output does not depend on scheduling.
"""

from __future__ import annotations

import csv
import dataclasses
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .datasets import GENERATORS, make_dataset, uniform_pair
from .errors import InputError, OTError
from .exact import solve_lp
from .io import read_bundle
from .measures import as_weights
from .solvers import check_method, default_options, solve

SWEEP_METHODS = ("sinkhorn-stab", "got-qp")
BENCH_METHODS = ("got-qp", "got-fw", "got-md")
DEFAULT_LAMBDAS = (1.0, 5.0, 10.0, 50.0)
DEFAULT_DIMS = (20, 50, 100, 200)
# scaling runs stop each solver at a common, moderate tolerance
BENCH_LAMBDA = 10.0
BENCH_TOL = 1e-7
BENCH_MAX_ITER = 5000


@dataclass
class SweepRecord:
    dataset: str
    method: str
    lam: float
    rho: float
    rho_star: float
    rel_diff: float
    iterations: int
    converged: bool
    wall_time_s: float
    absolute: bool = False  # rel_diff fell back to |rho - rho*| because rho* = 0
    error: str = ""


@dataclass
class BenchRecord:
    method: str
    dim: int
    trial: int
    wall_time_s: float
    converged: bool
    iterations: int = 0
    error: str = ""


def worker_count() -> int:
    raw = os.environ.get("OT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"OT_THREADS must be an integer, got {raw!r}") from None
    return max(n, 1)


def _run_cells(fn, cells, threads=None):
    threads = threads or worker_count()
    if threads == 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, cells))


def cell_seed(seed: int, *key: int) -> int:
    """Seed for one cell, independent of which worker runs it."""
    return int(np.random.SeedSequence([seed, *key]).generate_state(1)[0])


def resolve_dataset(spec: str, seed: int = 0, **params):
    """``gaussian`` / ``uniform`` / ``logitnormal`` (plus params) or ``bundle:PATH``."""
    if spec.startswith("bundle:"):
        mu, nu, M, _ = read_bundle(spec[len("bundle:"):])
        return mu, nu, M
    if spec not in GENERATORS:
        raise InputError(f"unknown dataset {spec!r}; use one of {sorted(GENERATORS)} or bundle:PATH")
    if spec != "gaussian":
        params.setdefault("seed", seed)
    return make_dataset(spec, **params)


def relative_difference(rho: float, rho_star: float):
    """(|rho - rho*| / |rho*|, False), or (|rho - rho*|, True) when rho* = 0."""
    if rho_star == 0:
        return abs(rho - rho_star), True
    return abs(rho - rho_star) / abs(rho_star), False


def _timed_solve(mu, nu, M, method, opts):
    t0 = time.perf_counter()
    res = solve(mu, nu, M, method, opts)
    return res, time.perf_counter() - t0


def run_lambda_sweep(dataset, methods=SWEEP_METHODS, lambdas=DEFAULT_LAMBDAS, seed: int = 0,
                     name: Optional[str] = None, budgets: Optional[dict] = None, threads=None):
    """rho* once from the LP, then every (method, lambda) cell.

    ``dataset`` is a spec string (see :func:`resolve_dataset`) or an
    ``(mu, nu, M)`` triple.  ``budgets`` maps method -> overrides such as
    ``{"max_iter": ..., "tol": ...}``.  Solver failures become rows with
    ``converged=False`` and the error text.
    """
    methods = [check_method(m) for m in methods]
    lambdas = [float(lam) for lam in lambdas]
    if any(not lam > 0 for lam in lambdas):
        raise InputError("all lambdas must be > 0")
    if isinstance(dataset, str):
        name = name or dataset
        mu, nu, M = resolve_dataset(dataset, seed)
    else:
        mu, nu, M = dataset
        name = name or "custom"
    mu, nu = as_weights(mu), as_weights(nu)
    rho_star = solve_lp(mu, nu, M).transport_cost
    budgets = budgets or {}

    def cell(key):
        method, lam = key
        try:
            opts = default_options(method, lam, **budgets.get(method, {})) if method != "lp" else None
            res, wall = _timed_solve(mu, nu, M, method, opts)
        except OTError as exc:
            return SweepRecord(name, method, lam, float("nan"), rho_star, float("nan"), 0, False,
                               0.0, rho_star == 0, f"{exc.code}: {exc}")
        rel, absolute = relative_difference(res.transport_cost, rho_star)
        return SweepRecord(name, method, lam, res.transport_cost, rho_star, rel, res.iterations,
                           res.converged, wall, absolute,
                           res.info.get("note", "") if not res.converged else "")

    keys = sorted((m, lam) for m in methods for lam in lambdas)
    return _run_cells(cell, keys, threads)


def run_scaling_bench(dims=DEFAULT_DIMS, methods=BENCH_METHODS, trials: int = 10, seed: int = 0,
                      lam: float = BENCH_LAMBDA, budgets: Optional[dict] = None, threads=None,
                      scale: float = 1.0):
    """Wall time per (method, dim, trial) on fresh uniform-cost data per (dim, trial).

    All methods see the same instance for a given (dim, trial).  Only the
    solve call is timed.
    """
    dims = [int(d) for d in dims]
    if any(d < 2 for d in dims):
        raise InputError("dimensions must be >= 2")
    if list(dims) != sorted(dims):
        raise InputError("dimensions must be ascending")
    if trials < 1:
        raise InputError(f"trials must be >= 1, got {trials}")
    methods = [check_method(m) for m in methods]
    budgets = budgets or {}

    def cell(key):
        dim, trial, method = key
        mu, nu, M = uniform_pair(dim, scale=scale, seed=cell_seed(seed, dim, trial))
        params = {"tol": BENCH_TOL, "max_iter": BENCH_MAX_ITER}
        params.update(budgets.get(method, {}))
        try:
            opts = default_options(method, lam, **params) if method != "lp" else None
            res, wall = _timed_solve(mu, nu, M, method, opts)
        except OTError as exc:
            return BenchRecord(method, dim, trial, float("nan"), False, 0, f"{exc.code}: {exc}")
        return BenchRecord(method, dim, trial, max(wall, 1e-9), res.converged, res.iterations)

    keys = [(d, t, m) for d in dims for t in range(trials) for m in methods]
    records = _run_cells(cell, keys, threads)
    return sorted(records, key=lambda r: (r.method, r.dim, r.trial))


def summarize_bench(records, quantiles=(0.05, 0.25, 0.5, 0.75, 0.95)):
    """Mean, std and quantiles of wall time per (method, dim), ordered by method then dim."""
    groups = {}
    for r in records:
        groups.setdefault((r.method, r.dim), []).append(r)
    out = []
    for (method, dim) in sorted(groups):
        rs = groups[(method, dim)]
        t = np.array([r.wall_time_s for r in rs if np.isfinite(r.wall_time_s)])
        row = {"method": method, "dim": dim, "trials": len(rs),
               "converged": sum(r.converged for r in rs),
               "mean_s": float(t.mean()) if t.size else float("nan"),
               "std_s": float(t.std(ddof=1)) if t.size > 1 else 0.0}
        for q in quantiles:
            row[f"q{int(round(q * 100)):02d}_s"] = float(np.quantile(t, q)) if t.size else float("nan")
        out.append(row)
    return out


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_records_csv(records, path) -> None:
    """Dataclass records or plain dicts, one row each, in the given order."""
    rows = [dataclasses.asdict(r) if dataclasses.is_dataclass(r) else dict(r) for r in records]
    if not rows:
        raise InputError("no records to write")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for row in rows:
            w.writerow({k: _cell(v) for k, v in row.items()})


def read_records_csv(path):
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def sweep_gnuplot(csv_path, methods, out_png="sweep.png") -> str:
    """gnuplot script: log-scale rel_diff vs lambda, one curve per method."""
    plots = ", ".join(
        f"'{csv_path}' using (strcol(2) eq '{m}' ? $3 : 1/0):6 with linespoints title '{m}'"
        for m in methods
    )
    return "\n".join([
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set logscale xy",
        "set xlabel 'lambda'",
        "set ylabel 'relative difference to LP'",
        "set terminal pngcairo size 800,500",
        f"set output '{out_png}'",
        f"plot {plots}",
        "",
    ])


def bench_gnuplot(summary_csv, methods, out_png="bench.png") -> str:
    """gnuplot script: mean wall time vs dimension with 5-95% error bars."""
    plots = ", ".join(
        f"'{summary_csv}' using (strcol(1) eq '{m}' ? $2 : 1/0):5:7:11 "
        f"with yerrorlines title '{m}'"
        for m in methods
    )
    return "\n".join([
        "set datafile separator ','",
        "set logscale y",
        "set xlabel 'dimension k'",
        "set ylabel 'wall time (s)'",
        "set terminal pngcairo size 800,500",
        f"set output '{out_png}'",
        f"plot {plots}",
        "",
    ])
