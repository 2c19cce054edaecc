import numpy as np
import pytest

from gini_ot.bench import (
    BenchRecord,
    bench_gnuplot,
    cell_seed,
    read_records_csv,
    relative_difference,
    resolve_dataset,
    run_lambda_sweep,
    run_scaling_bench,
    summarize_bench,
    sweep_gnuplot,
    worker_count,
    write_records_csv,
)
from gini_ot.datasets import uniform_pair
from gini_ot.errors import InputError
from gini_ot.exact import solve_lp
from gini_ot.io import write_bundle

METRIC2 = ([0.5, 0.5], [0.5, 0.5], np.array([[0.0, 1.0], [1.0, 0.0]]))


def test_relative_difference():
    assert relative_difference(1.5, 1.0) == (0.5, False)
    assert relative_difference(0.25, 0.0) == (0.25, True)


def test_sweep_absolute_fallback():
    recs = run_lambda_sweep(METRIC2, ["got-qp"], [1.0, 50.0])
    assert [r.lam for r in recs] == [1.0, 50.0]
    for r in recs:
        assert r.absolute and r.rho_star == 0.0 and r.converged
        assert r.rel_diff == pytest.approx(0.0, abs=1e-12)


def test_sweep_errors_are_rows():
    # plain Sinkhorn breaks down here; the sweep keeps going
    M = np.array([[0.0, 800.0], [800.0, 900.0]])
    recs = run_lambda_sweep(([0.3, 0.7], [0.5, 0.5], M), ["sinkhorn", "lp"], [10.0])
    by = {r.method: r for r in recs}
    assert not by["sinkhorn"].converged and by["sinkhorn"].error
    assert by["lp"].converged and by["lp"].rel_diff == 0.0
    with pytest.raises(InputError):
        run_lambda_sweep(METRIC2, ["got-qp"], [0.0])
    with pytest.raises(InputError):
        run_lambda_sweep(METRIC2, ["magic"], [1.0])


def test_sweep_deterministic_and_rho_star(tmp_path):
    args = ("uniform", ["sinkhorn-stab", "got-qp"], [1.0, 10.0])
    kw = {"seed": 3}
    a = run_lambda_sweep(*args, **kw)
    b = run_lambda_sweep(*args, **kw, threads=3)
    strip = lambda rs: [{**r.__dict__, "wall_time_s": 0} for r in rs]  # noqa: E731
    assert strip(a) == strip(b)
    mu, nu, M = resolve_dataset("uniform", seed=3)
    rho = solve_lp(mu, nu, M).transport_cost
    assert all(abs(r.rho_star - rho) <= 1e-12 for r in a)
    write_records_csv(a, tmp_path / "a.csv")
    write_records_csv(b, tmp_path / "b.csv")
    ra, rb = read_records_csv(tmp_path / "a.csv"), read_records_csv(tmp_path / "b.csv")
    for x, y in zip(ra, rb):
        x.pop("wall_time_s"), y.pop("wall_time_s")
    assert ra == rb


def test_bundle_dataset(tmp_path):
    mu, nu, M = uniform_pair(k=8, seed=1)
    write_bundle(tmp_path, mu, nu, M, "uniform", {"k": 8}, 1)
    a, b, C = resolve_dataset(f"bundle:{tmp_path}")
    np.testing.assert_array_equal(C, M)
    with pytest.raises(InputError):
        resolve_dataset("nope")


def test_smoke_bench():
    recs = run_scaling_bench([10], ["lp"], trials=2)
    assert len(recs) == 2 and all(r.converged and r.wall_time_s > 0 for r in recs)
    summary = summarize_bench(recs)
    assert len(summary) == 1 and summary[0]["trials"] == 2
    assert summary[0]["q05_s"] <= summary[0]["q50_s"] <= summary[0]["q95_s"]


def test_bench_order_and_seeds():
    recs = run_scaling_bench([5, 8], ["got-qp", "lp"], trials=2, threads=2)
    keys = [(r.method, r.dim, r.trial) for r in recs]
    assert keys == sorted(keys)
    assert cell_seed(0, 5, 1) == cell_seed(0, 5, 1) != cell_seed(0, 5, 0)
    summary = summarize_bench(recs)
    assert [(s["method"], s["dim"]) for s in summary] == [("got-qp", 5), ("got-qp", 8),
                                                          ("lp", 5), ("lp", 8)]
    with pytest.raises(InputError):
        run_scaling_bench([8, 5], ["lp"])
    with pytest.raises(InputError):
        run_scaling_bench([5], ["lp"], trials=0)


def test_summary_handles_failures():
    recs = [BenchRecord("lp", 5, 0, 0.5, True), BenchRecord("lp", 5, 1, float("nan"), False)]
    row = summarize_bench(recs)[0]
    assert row["converged"] == 1 and row["mean_s"] == 0.5


def test_worker_count(monkeypatch):
    monkeypatch.setenv("OT_THREADS", "4")
    assert worker_count() == 4
    monkeypatch.setenv("OT_THREADS", "x")
    with pytest.raises(InputError):
        worker_count()


def test_gnuplot_scripts():
    s = sweep_gnuplot("s.csv", ["got-qp"])
    assert "set logscale xy" in s and "'got-qp'" in s
    b = bench_gnuplot("b.csv", ["got-fw"])
    assert "yerrorlines" in b and "'got-fw'" in b
