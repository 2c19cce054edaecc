import json
import re
import subprocess
import sys

import numpy as np
import pytest

from gini_ot.cli import main
from gini_ot.forecast import LocaleTable, write_locales
from gini_ot.io import read_matrix_csv, write_matrix_csv

from oracles import LON_1000KM

ERROR_LINE = re.compile(r"^error: [a-z_]+ .+$")


@pytest.fixture
def metric_files(tmp_path):
    write_matrix_csv(tmp_path / "mu.csv", [[0.6, 0.4]])
    write_matrix_csv(tmp_path / "nu.csv", [[0.5, 0.5]], header=["x", "y"])
    write_matrix_csv(tmp_path / "M.csv", [[0.0, 1.0], [1.0, 0.0]])
    return tmp_path


def solve_args(d, *extra):
    return ["solve", "--mu", str(d / "mu.csv"), "--nu", str(d / "nu.csv"),
            "--cost", str(d / "M.csv"), *extra]


def single_error_line(err):
    lines = err.strip().splitlines()
    assert len(lines) == 1 and ERROR_LINE.match(lines[0]), err
    return lines[0]


def test_solve_json(metric_files, capsys):
    assert main(solve_args(metric_files)) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["transport_cost"] == pytest.approx(0.1)
    assert out["converged"]


def test_solve_csv_file(metric_files):
    out = metric_files / "plan.csv"
    code = main(solve_args(metric_files, "--method", "got-qp", "--lambda", "1", "--out", "csv",
                           "--output", str(out)))
    assert code == 0
    P, header = read_matrix_csv(out)
    assert header == ["x", "y"]
    np.testing.assert_allclose(P, [[0.5, 0.1], [0.0, 0.4]], atol=1e-8)


def test_usage_error(metric_files, capsys):
    assert main(solve_args(metric_files, "--method", "magic")) == 2
    assert single_error_line(capsys.readouterr().err).startswith("error: usage")
    assert main([]) == 2


def test_input_error(metric_files, capsys):
    assert main(["solve", "--mu", str(metric_files / "none.csv"), "--nu", "x", "--cost", "y"]) == 3
    single_error_line(capsys.readouterr().err)
    write_matrix_csv(metric_files / "M.csv", [[0.0, 1.0, 2.0]])
    assert main(solve_args(metric_files)) == 3
    single_error_line(capsys.readouterr().err)


def test_not_converged(metric_files, capsys):
    code = main(solve_args(metric_files, "--method", "got-md", "--lambda", "0.5",
                           "--max-iter", "1", "--tol", "1e-14"))
    assert code == 4
    assert single_error_line(capsys.readouterr().err).startswith("error: not_converged")


def test_gen_and_sweep(tmp_path, capsys):
    bundle = tmp_path / "b"
    assert main(["gen", "--dataset", "uniform", "--k", "12", "--seed", "5", "--out", str(bundle)]) == 0
    assert json.loads((bundle / "manifest.json").read_text())["seed"] == 5
    outs = []
    for name in ("a.csv", "b.csv"):
        assert main(["sweep", "--dataset", f"bundle:{bundle}", "--methods", "got-qp,sinkhorn-stab",
                     "--lambdas", "1,10", "--out", str(tmp_path / name),
                     "--gnuplot", str(tmp_path / "s.gp")]) == 0
        rows = (tmp_path / name).read_text().splitlines()
        outs.append([",".join(r.split(",")[:8]) for r in rows])  # drop timing columns
    assert outs[0] == outs[1] and len(outs[0]) == 5
    assert (tmp_path / "s.gp").exists()


def test_bench(tmp_path, capsys):
    code = main(["bench", "--dims", "6,9", "--methods", "lp,got-qp", "--trials", "2",
                 "--out", str(tmp_path / "r.csv"), "--summary", str(tmp_path / "s.csv")])
    assert code == 0
    assert len((tmp_path / "r.csv").read_text().splitlines()) == 9
    assert len((tmp_path / "s.csv").read_text().splitlines()) == 5
    assert main(["bench", "--dims", "9,6", "--out", str(tmp_path / "r.csv")]) == 3
    single_error_line(capsys.readouterr().err)


def test_eval(tmp_path, capsys):
    t = LocaleTable(("A", "B"), [0.0, 0.0], [0.0, LON_1000KM], [1.0, 0.0], [0.0, 1.0])
    write_locales(t, tmp_path / "l.csv")
    code = main(["eval", "--input", str(tmp_path / "l.csv"), "--plan-out", str(tmp_path / "f.csv")])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["emd"] == pytest.approx(1000.0, abs=1e-6)
    assert (tmp_path / "f.csv").read_text().splitlines()[0] == "from_locale,to_locale,mass,cost"
    (tmp_path / "bad.csv").write_text("locale_id,lat\nA,0\n", encoding="utf-8")
    assert main(["eval", "--input", str(tmp_path / "bad.csv")]) == 3
    assert "missing" in single_error_line(capsys.readouterr().err)


def test_module_entry_point(metric_files):
    proc = subprocess.run([sys.executable, "-m", "gini_ot", *solve_args(metric_files)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["method"] == "lp"
