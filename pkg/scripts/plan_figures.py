#!/usr/bin/env python3
"""Transport plans between the two discretized Gaussians: LP, entropic and Gini.

Saves each plan as a CSV matrix and, when matplotlib is installed, a grid of
heat maps (entropic on top, Gini below, one column per lambda, LP alongside).
matplotlib is only needed for the PNG; it is not a dependency of the package.

    python scripts/plan_figures.py --lambdas 1,5,10,50 --out results/plans
"""

import argparse
import logging
from pathlib import Path

import numpy as np

from gini_ot.datasets import gaussian_pair
from gini_ot.exact import solve_lp
from gini_ot.io import write_matrix_csv
from gini_ot.solvers import default_options, solve

log = logging.getLogger("plan_figures")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", type=Path, default=Path("results/plans"))
    ap.add_argument("--lambdas", default="1,5,10,50")
    ap.add_argument("--k", type=int, default=100)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    mu, nu, M = gaussian_pair(k=args.k)
    lambdas = [float(x) for x in args.lambdas.split(",")]
    args.out.mkdir(parents=True, exist_ok=True)
    lp = solve_lp(mu, nu, M)
    write_matrix_csv(args.out / "lp.csv", lp.plan)
    plans = {}
    for method in ("sinkhorn-stab", "got-qp"):
        for lam in lambdas:
            res = solve(mu, nu, M, method, default_options(method, lam))
            plans[method, lam] = res.plan
            write_matrix_csv(args.out / f"{method}_lambda{lam:g}.csv", res.plan)
            log.info("%-14s lambda=%-5g cost=%.10g (LP %.10g) converged=%s", method, lam,
                     res.transport_cost, lp.transport_cost, res.converged)

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        log.info("matplotlib not installed; CSV plans written to %s", args.out)
        return
    cols = len(lambdas) + 1
    fig, axes = plt.subplots(2, cols, figsize=(2.6 * cols, 5.4))
    for row, method in enumerate(("sinkhorn-stab", "got-qp")):
        for c, lam in enumerate(lambdas):
            ax = axes[row, c]
            ax.imshow(np.sqrt(plans[method, lam]), cmap="viridis", origin="lower")
            ax.set_title(f"{method} lambda={lam:g}", fontsize=8)
            ax.set_xticks([])
            ax.set_yticks([])
        ax = axes[row, -1]
        ax.imshow(np.sqrt(lp.plan), cmap="viridis", origin="lower")
        ax.set_title("LP", fontsize=8)
        ax.set_xticks([])
        ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(args.out / "plans.png", dpi=120)
    log.info("wrote %s", args.out / "plans.png")


if __name__ == "__main__":
    main()
