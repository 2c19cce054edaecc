"""Command-line front end: solve, sweep, bench, gen, eval.

Exit codes: 0 success, 2 usage, 3 bad input, 4 solver did not converge
(``solve`` only), 1 any other solver failure.  Errors are printed as one
line: ``error: <code> <message>``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import bench
from .datasets import GENERATORS
from .errors import InputError, OTError
from .forecast import EVAL_METHODS, emd_score, load_locales, write_flows_csv
from .io import read_matrix_csv, read_measure_csv, write_bundle, write_plan_csv
from .measures import METHODS
from .solvers import default_options, solve

EXIT_OK, EXIT_SOLVER, EXIT_USAGE, EXIT_INPUT, EXIT_NOT_CONVERGED = 0, 1, 2, 3, 4


class UsageError(Exception):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _methods(text):
    out = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in out if m not in METHODS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown method {bad[0]!r}; choose from {', '.join(METHODS)}")
    return out


def _add_solver_flags(p, lam_default=1.0):
    p.add_argument("--lambda", dest="lam", type=float, default=lam_default,
                   help="regularization weight (larger = closer to the LP)")
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--step-size", type=float, default=None, help="mirror-descent step eta")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gini-ot", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one OT instance from CSV inputs")
    p.add_argument("--method", choices=METHODS, default="lp")
    p.add_argument("--mu", required=True, help="CSV with the source weights")
    p.add_argument("--nu", required=True, help="CSV with the target weights")
    p.add_argument("--cost", required=True, help="CSV cost matrix (n rows, k columns)")
    p.add_argument("--out", choices=("json", "csv"), default="json",
                   help="json: full result; csv: the plan matrix")
    p.add_argument("--output", default="-", help="file to write (default stdout)")
    _add_solver_flags(p)

    p = sub.add_parser("sweep", help="relative difference to the LP over a lambda grid")
    p.add_argument("--dataset", default="gaussian",
                   help=f"one of {', '.join(sorted(GENERATORS))} or bundle:PATH")
    p.add_argument("--methods", type=_methods, default=list(bench.SWEEP_METHODS))
    p.add_argument("--lambdas", type=_floats, default=list(bench.DEFAULT_LAMBDAS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=None, help="override every method's budget")
    p.add_argument("--tol", type=float, default=None, help="override every method's tolerance")
    p.add_argument("--out", required=True, help="CSV of sweep records")
    p.add_argument("--gnuplot", default=None, help="also write a gnuplot script here")

    p = sub.add_parser("bench", help="wall time vs dimension on uniform-cost data")
    p.add_argument("--dims", type=_ints, default=list(bench.DEFAULT_DIMS))
    p.add_argument("--methods", type=_methods, default=list(bench.BENCH_METHODS))
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lambda", dest="lam", type=float, default=bench.BENCH_LAMBDA)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--out", required=True, help="CSV of per-trial records")
    p.add_argument("--summary", default=None, help="CSV of mean/quantiles per cell")
    p.add_argument("--gnuplot", default=None, help="gnuplot script for the summary")

    p = sub.add_parser("gen", help="write a dataset as a CSV bundle plus manifest")
    p.add_argument("--dataset", choices=sorted(GENERATORS), required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=None, help="support size")
    p.add_argument("--p", type=float, default=None, help="grid-cost exponent")
    p.add_argument("--scale", type=float, default=None, help="uniform cost scale")
    p.add_argument("--sigma", type=float, default=None, help="logit-normal sigma")

    p = sub.add_parser("eval", help="EMD of a forecast against actuals")
    p.add_argument("--input", required=True, help="CSV with locale_id,lat,lon,forecast,actual")
    p.add_argument("--method", choices=EVAL_METHODS, default="lp")
    p.add_argument("--cost", default=None, help="optional CSV cost matrix replacing great-circle km")
    p.add_argument("--period", default=None)
    p.add_argument("--plan-out", default=None, help="CSV of flows from_locale,to_locale,mass,cost")
    p.add_argument("--output", default="-", help="JSON report path (default stdout)")
    _add_solver_flags(p)
    return parser


def _emit(text: str, output: str) -> None:
    if output == "-":
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _budgets(args, methods):
    over = {k: v for k, v in (("max_iter", args.max_iter), ("tol", args.tol)) if v is not None}
    return {m: dict(over) for m in methods}


def cmd_solve(args) -> int:
    mu = read_measure_csv(args.mu)
    nu = read_measure_csv(args.nu)
    M, _ = read_matrix_csv(args.cost)
    opts = None
    if args.method != "lp":
        opts = default_options(args.method, args.lam, max_iter=args.max_iter, tol=args.tol,
                               step_size=args.step_size, seed=args.seed)
    res = solve(mu, nu, M, args.method, opts)
    if args.out == "json":
        _emit(json.dumps(res.to_dict(), indent=2) + "\n", args.output)
    elif args.output == "-":
        w = csv.writer(sys.stdout, lineterminator="\n")
        if nu.labels is not None:
            w.writerow(nu.labels)
        w.writerows([repr(float(x)) for x in row] for row in res.plan)
    else:
        write_plan_csv(args.output, res.plan, col_labels=nu.labels)
    if not res.converged:
        note = res.info.get("note", "max_iter reached")
        print(f"error: not_converged {args.method} stopped after {res.iterations} iterations "
              f"({note}); marginal violation {res.marginal_violation:.3e}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_sweep(args) -> int:
    records = bench.run_lambda_sweep(args.dataset, args.methods, args.lambdas, seed=args.seed,
                                     budgets=_budgets(args, args.methods))
    bench.write_records_csv(records, args.out)
    if args.gnuplot:
        Path(args.gnuplot).write_text(bench.sweep_gnuplot(args.out, args.methods), encoding="utf-8")
    for r in records:
        flag = " (absolute)" if r.absolute else ""
        status = "ok" if r.converged else f"not converged {r.error}".rstrip()
        print(f"{r.method:14s} lambda={r.lam:<8g} rel_diff={r.rel_diff:.3e}{flag} {status}")
    return EXIT_OK


def cmd_bench(args) -> int:
    records = bench.run_scaling_bench(args.dims, args.methods, trials=args.trials, seed=args.seed,
                                      lam=args.lam, budgets=_budgets(args, args.methods))
    bench.write_records_csv(records, args.out)
    summary = bench.summarize_bench(records)
    if args.summary:
        bench.write_records_csv(summary, args.summary)
        if args.gnuplot:
            Path(args.gnuplot).write_text(bench.bench_gnuplot(args.summary, args.methods),
                                          encoding="utf-8")
    elif args.gnuplot:
        raise InputError("--gnuplot needs --summary")
    for row in summary:
        print(f"{row['method']:8s} k={row['dim']:<5d} mean={row['mean_s']:.4f}s "
              f"q05={row['q05_s']:.4f}s q95={row['q95_s']:.4f}s "
              f"converged={row['converged']}/{row['trials']}")
    return EXIT_OK


def cmd_gen(args) -> int:
    params = {k: v for k, v in (("k", args.k), ("p", args.p), ("scale", args.scale),
                                ("sigma", args.sigma)) if v is not None}
    seed = None if args.dataset == "gaussian" else args.seed
    if seed is not None:
        params["seed"] = seed
    try:
        mu, nu, M = GENERATORS[args.dataset](**params)
    except TypeError as exc:
        raise InputError(f"bad parameter for {args.dataset}: {exc}") from None
    params.pop("seed", None)
    out = write_bundle(args.out, mu, nu, M, args.dataset, params, seed)
    print(f"wrote {args.dataset} bundle to {out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    table = load_locales(args.input, period=args.period)
    cost = read_matrix_csv(args.cost)[0] if args.cost else None
    opts = None
    if args.method != "lp":
        opts = default_options(args.method, args.lam, max_iter=args.max_iter, tol=args.tol,
                               step_size=args.step_size, seed=args.seed)
    report = emd_score(table, args.method, opts, cost=cost)
    out = report.to_dict()
    out["dropped_rows"] = table.dropped
    _emit(json.dumps(out, indent=2) + "\n", args.output)
    if args.plan_out:
        write_flows_csv(report, args.plan_out)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "bench": cmd_bench, "gen": cmd_gen,
            "eval": cmd_eval}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: usage {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc.code} {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: io_error {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OTError as exc:
        print(f"error: {exc.code} {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED if args.command == "solve" else EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
