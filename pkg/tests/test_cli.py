import numpy as np
import pytest

from causalreg.cli import main
from causalreg.data import Dataset
from causalreg.output import read_results_rows
from causalreg.errors import SchemaError


def run_cli(args):
    return main([str(a) for a in args])


def test_simulate_reproducible_bytes(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["simulate", "--scenario", 2, "--d", 4, "--l", 4, "--n", 50,
            "--runs", 4, "--seed", 7, "--methods", "concorr-ridge,cv-ridge"]
    assert run_cli(args + ["--out", out1]) == 0
    assert run_cli(args + ["--out", out2]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_simulate_summary_table(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert run_cli(["simulate", "--scenario", 1, "--d", 3, "--n", 30, "--runs", 3,
                    "--seed", 1, "--methods", "concorr-ridge", "--out", out]) == 0
    stdout = capsys.readouterr().out
    assert "successes" in stdout and "concorr-ridge" in stdout
    rows = read_results_rows(out)
    assert len(rows) == 3


def test_plot_one_circle_per_record(tmp_path):
    csv_path, svg_path = tmp_path / "r.csv", tmp_path / "r.svg"
    assert run_cli(["simulate", "--scenario", 2, "--d", 3, "--n", 40, "--runs", 5,
                    "--seed", 3, "--methods", "concorr-ridge,concorr-lasso",
                    "--out", csv_path]) == 0
    assert run_cli(["plot", "--in", csv_path, "--out", svg_path]) == 0
    svg = svg_path.read_text()
    assert svg.count("<circle") == 10  # one per (run, method) record
    assert svg.count("<line") >= 2  # the two baseline reference lines


def test_plot_rejects_bad_schema(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("", encoding="utf-8")
    assert run_cli(["plot", "--in", bad, "--out", tmp_path / "x.svg"]) == 1
    assert "error:" in capsys.readouterr().err
    bad.write_text("a,b\n1,2\n", encoding="utf-8")
    assert run_cli(["plot", "--in", bad, "--out", tmp_path / "x.svg"]) == 1


def _write_confounded_csv(path, rng, n=600):
    # unconfounded 4-predictor linear model; dropping x3 (correlated with the
    # others through a shared source) confounds the remaining system
    z = rng.standard_normal((n, 4))
    mix = rng.standard_normal((4, 4)) + np.eye(4)
    x = z @ mix
    a = np.array([1.0, -0.8, 0.6, 1.2])
    y = x @ a + 0.3 * rng.standard_normal(n)
    lines = ["x0,x1,x2,x3,quality"]
    for i in range(n):
        lines.append(",".join(repr(float(v)) for v in (*x[i], y[i])))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return a


def test_fit_truth_from_full_protocol(tmp_path, capsys):
    rng = np.random.default_rng(8)
    data = tmp_path / "toy.csv"
    _write_confounded_csv(data, rng)
    assert run_cli(["fit", "--data", data, "--target", "quality", "--method", "ridge",
                    "--drop", "x3", "--truth-from-full", "--normalize"]) == 0
    out = capsys.readouterr().out
    report = dict(
        line.split(": ", 1) for line in out.strip().split("\n") if ": " in line
    )
    assert report["method"] == "ridge"
    assert report["normalized"] == "true"
    assert "x3" not in report["coefficients"]
    assert 0.0 <= float(report["beta_hat"]) <= 1.0
    assert float(report["err_concorr_vs_truth"]) <= float(report["err_unreg_vs_truth"]) + 1e-9


def test_fit_drop_nothing_error_near_zero(tmp_path, capsys):
    # isotropic design: the spectrum is degenerate, the tie-break keeps the
    # unregularized fit, and the truth is that same fit
    rng = np.random.default_rng(9)
    n, d = 80, 4
    g = rng.standard_normal((n, d))
    q, _ = np.linalg.qr(g - g.mean(axis=0))
    a = rng.standard_normal(d)
    y = q @ a + 0.05 * rng.standard_normal(n)
    data = tmp_path / "iso.csv"
    lines = ["p0,p1,p2,p3,quality"]
    for i in range(n):
        lines.append(",".join(repr(float(v)) for v in (*q[i], y[i])))
    data.write_text("\n".join(lines) + "\n", encoding="utf-8")
    assert run_cli(["fit", "--data", data, "--target", "quality",
                    "--truth-from-full"]) == 0
    out = capsys.readouterr().out
    report = dict(l.split(": ", 1) for l in out.strip().split("\n") if ": " in l)
    assert float(report["err_concorr_vs_truth"]) < 1e-9


def test_fit_missing_column_exits_nonzero(tmp_path, capsys):
    data = tmp_path / "t.csv"
    data.write_text("a,b\n1,2\n3,4\n5,6\n", encoding="utf-8")
    assert run_cli(["fit", "--data", data, "--target", "quality"]) == 1
    assert "error:" in capsys.readouterr().err


def test_bounds_zero_variance_all_zero_gaps(tmp_path, capsys):
    out = tmp_path / "b.csv"
    assert run_cli(["bounds", "--kind", "theorem3", "--ell", 40, "--d", 3,
                    "--variance", 0, "--trials", 50, "--seed", 5, "--out", out]) == 0
    rows = out.read_text().strip().split("\n")[1:]
    assert len(rows) == 50
    assert all(float(r.split(",")[1]) == 0.0 for r in rows)
    assert all(r.split(",")[3] == "0" for r in rows)


def test_bounds_reproducible_bytes(tmp_path):
    args = ["bounds", "--kind", "theorem3", "--ell", 30, "--d", 2,
            "--trials", 40, "--seed", 11]
    out1, out2 = tmp_path / "b1.csv", tmp_path / "b2.csv"
    assert run_cli(args + ["--out", out1]) == 0
    assert run_cli(args + ["--out", out2]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_bounds_jl_tail_prints_bound(capsys):
    assert run_cli(["bounds", "--kind", "jl-tail", "--m", 50, "--n-dim", 3,
                    "--beta", 2.0, "--trials", 5000, "--seed", 2]) == 0
    out = capsys.readouterr().out
    report = dict(l.split(": ", 1) for l in out.strip().split("\n") if ": " in l)
    assert float(report["empirical_freq"]) <= float(report["bound"]) + 0.05


def test_threads_env_caps_workers(monkeypatch):
    from causalreg.cli import _workers

    monkeypatch.delenv("CAUSALREG_THREADS", raising=False)
    assert _workers() == 1
    monkeypatch.setenv("CAUSALREG_THREADS", "3")
    assert _workers() == 3
    monkeypatch.setenv("CAUSALREG_THREADS", "0")
    assert _workers() == 1


def test_read_results_rejects_ragged(tmp_path):
    p = tmp_path / "r.csv"
    from causalreg.output import RESULTS_HEADER

    p.write_text(RESULTS_HEADER + "\n1,concorr-ridge,0.1\n", encoding="utf-8")
    with pytest.raises(SchemaError):
        read_results_rows(p)
