"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
report.  The wine-protocol criterion needs the UCI red-wine CSV on disk
(data/winequality-red.csv or $CAUSALREG_WINE_CSV) and is skipped with
instructions when the file is absent.
"""

import os
import time
from pathlib import Path

import numpy as np
import pytest

from causalreg.bounds import (
    ConfoundedRegressionProblem,
    FunctionClassSpec,
    gaussian_grid,
    interventional_loss,
    jl_tail_check,
    loss_gap_lemma1,
    nonlinear_gap_1d,
    observational_loss,
    theorem3_violation_check,
)
from causalreg.concorr import concorr_fit
from causalreg.data import (
    Dataset,
    center_and_scale,
    drop_columns,
    empirical_covariances,
    read_dataset_csv,
)
from causalreg.simulation import (
    ExperimentConfig,
    LinearSCM,
    gen_scenario2,
    run_experiment,
    summarize_rates,
    theorem1_moment_draws,
)
from causalreg.solvers import (
    lasso_from_cov,
    lasso_objective,
    ols_from_cov,
    ridge_from_cov,
)

WORKERS = min(4, os.cpu_count() or 1)
WINE_ENV = "CAUSALREG_WINE_CSV"


def _wine_path():
    env = os.environ.get(WINE_ENV, "").strip()
    candidates = [env] if env else []
    candidates += [
        str(Path(__file__).resolve().parent.parent / "data" / "winequality-red.csv"),
        "data/winequality-red.csv",
    ]
    for c in candidates:
        if c and os.path.exists(c):
            return c
    return None


class _Report:
    def __init__(self, number, description, limit_s=None):
        self.number = number
        self.description = description
        self.limit_s = limit_s

    def __enter__(self):
        self.t0 = time.time()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.time() - self.t0
        status = "PASS" if exc_type is None else "FAIL"
        print(f"ACCEPTANCE {self.number} {status} ({elapsed:7.1f}s): {self.description}")
        if exc_type is None and self.limit_s is not None:
            assert elapsed < self.limit_s, f"runtime {elapsed:.0f}s over {self.limit_s}s"
        return False


def test_criterion_1_unconfounded_table():
    with _Report(1, "unconfounded table: ConCorr ridge/lasso success and failure rates", 300):
        cfg = ExperimentConfig(
            scenario=1, d=30, ell=30, n=50, runs=200, seed=2025,
            methods=("concorr-ridge", "concorr-lasso"), n_workers=WORKERS,
        )
        rates = summarize_rates(run_experiment(cfg), cfg.methods)
        ridge_s, ridge_f = rates["concorr-ridge"]
        lasso_s, _ = rates["concorr-lasso"]
        print(f"  concorr-ridge success={ridge_s:.3f} (0.63+-0.10) failure={ridge_f:.3f} (0.11+-0.08)")
        print(f"  concorr-lasso success={lasso_s:.3f} (0.61+-0.10)")
        assert abs(ridge_s - 0.63) <= 0.10
        assert abs(ridge_f - 0.11) <= 0.08
        assert abs(lasso_s - 0.61) <= 0.10


def test_criterion_2_confounded_table():
    with _Report(2, "confounded large-sample table: ConCorr-Ridge vs CV-Ridge", 900):
        cfg = ExperimentConfig(
            scenario=2, d=30, ell=30, n=1000, runs=200, seed=4000,
            methods=("concorr-ridge", "cv-ridge"), n_workers=WORKERS,
        )
        rates = summarize_rates(run_experiment(cfg), cfg.methods)
        cr_s, _ = rates["concorr-ridge"]
        cv_s, cv_f = rates["cv-ridge"]
        print(f"  concorr-ridge success={cr_s:.3f} (0.69+-0.10)")
        print(f"  cv-ridge success={cv_s:.3f} (<=0.25) failure={cv_f:.3f} (>=0.40)")
        assert abs(cr_s - 0.69) <= 0.10
        assert cv_s <= 0.25
        assert cv_f >= 0.40


def test_criterion_3_wine_protocol():
    path = _wine_path()
    if path is None:
        print("ACCEPTANCE 3 SKIP: wine protocol needs the UCI red-wine CSV at "
              f"data/winequality-red.csv or ${WINE_ENV}")
        pytest.skip(
            "user-supplied dataset absent: download winequality-red.csv from the "
            "UCI repository into data/ or set " + WINE_ENV
        )
    with _Report(3, "wine protocol: drop alcohol, normalize; ridge/lasso errors and beta"):
        full = read_dataset_csv(path, "quality")
        reduced = drop_columns(full, ["alcohol"])
        cov_full = empirical_covariances(center_and_scale(full, normalize=True))
        ols_full = ols_from_cov(cov_full)
        keep = [j for j, c in enumerate(full.column_names) if c != "alcohol"]
        truth = ols_full.coefficients[keep]

        errors = {}
        betas = {}
        for method in ("ridge", "lasso"):
            res = concorr_fit(reduced, method, normalize=True)
            diff = res.vector.coefficients - truth
            errors[method] = float(diff @ diff / (diff @ diff + truth @ truth))
            betas[method] = res.beta_hat
        print(f"  ridge err={errors['ridge']:.3f} (0.45+-0.10) "
              f"lasso err={errors['lasso']:.3f} (0.35+-0.10) "
              f"beta_hat={betas['ridge']:.3f} (0.80+-0.15)")
        assert abs(errors["ridge"] - 0.45) <= 0.10
        assert abs(errors["lasso"] - 0.35) <= 0.10
        assert abs(betas["ridge"] - 0.80) <= 0.15


def _random_cov(rng, d, n=60):
    ds = center_and_scale(Dataset(rng.standard_normal((n, d)), rng.standard_normal(n)))
    return empirical_covariances(ds)


def _brute_force_lasso(cov, lam, rounds=55, points=41):
    a = np.zeros(cov.d)
    width = 3.0
    for _ in range(rounds):
        for j in range(cov.d):
            grid = a[j] + np.linspace(-width, width, points)
            trial = a.copy()
            vals = []
            for g in grid:
                trial[j] = g
                vals.append(lasso_objective(cov, trial, lam))
            a[j] = grid[int(np.argmin(vals))]
        width *= 0.55
    return a


def test_criterion_4_solver_oracle_suite():
    with _Report(4, "solver optimality on 1000 random problems + brute-force cross-check", 120):
        rng = np.random.default_rng(44)
        for _ in range(1000):
            d = int(rng.integers(1, 11))
            cov = _random_cov(rng, d)
            lam = float(10 ** rng.uniform(-5, 1))
            ar = ridge_from_cov(cov, lam).coefficients
            grad = 2.0 * (cov.sxx @ ar + lam * ar - cov.sxy)
            assert np.max(np.abs(grad)) < 1e-8
            al = lasso_from_cov(cov, lam).coefficients
            resid = 2.0 * (cov.sxx @ al - cov.sxy)
            nz = al != 0.0
            assert np.all(np.abs(resid[nz] + lam * np.sign(al[nz])) < 1e-6)
            assert np.all(np.abs(resid[~nz]) <= lam + 1e-6)
        for _ in range(100):
            cov = _random_cov(rng, 3)
            lam = float(10 ** rng.uniform(-3, 0))
            fast = lasso_from_cov(cov, lam).coefficients
            brute = _brute_force_lasso(cov, lam)
            assert (
                lasso_objective(cov, fast, lam)
                <= lasso_objective(cov, brute, lam) + 1e-3
            )


def test_criterion_5_covariance_identity():
    with _Report(5, "population regression-shift identity on 1000 generated instances", 120):
        for seed in range(1000):
            inst = gen_scenario2(5, 9, 20, rng_seed=seed)
            m, a, c = inst.scm.m, inst.scm.a, inst.scm.c
            sxx = m.T @ m
            via_solve = np.linalg.solve(sxx, sxx @ a + m.T @ c) - a
            via_pinv = np.linalg.pinv(m) @ c
            assert np.max(np.abs(via_solve - via_pinv)) < 1e-10


def test_criterion_6_loss_gap_identity():
    with _Report(6, "loss-gap identity: 1000 linear instances exact, 20 nonlinear vs quadrature", 120):
        rng = np.random.default_rng(66)
        for _ in range(1000):
            d = int(rng.integers(2, 7))
            ell = int(rng.integers(d, d + 8))
            m = rng.standard_normal((ell, d))
            a = rng.standard_normal(d)
            c = rng.standard_normal(ell)
            prob = ConfoundedRegressionProblem(
                LinearSCM(m, a, c, float(rng.uniform(0, 2))), a, float(c @ c)
            )
            w = rng.standard_normal(d)
            gap = loss_gap_lemma1(prob, w)  # asserts the 1e-10 match internally
            direct = interventional_loss(prob, w) - observational_loss(prob, w)
            assert abs(gap - direct) <= 1e-10 * max(1.0, abs(gap))

        z, wgt = gaussian_grid()
        shapes = [
            lambda x, k: np.tanh(k * x),
            lambda x, k: np.sin(k * x),
            lambda x, k: k * x**2,
            lambda x, k: np.abs(x) * k,
        ]
        for i in range(20):
            f0 = shapes[i % len(shapes)]
            k = float(rng.uniform(0.5, 2.0))
            f = lambda x: f0(x, k)
            a1 = float(rng.uniform(-1, 1))
            m1 = float(rng.uniform(0.5, 2.0))
            c1 = float(rng.uniform(-1, 1))
            x = m1 * z
            obs = float(wgt @ (a1 * m1 * z + c1 * z - f(x)) ** 2)
            inner = (a1 * m1 * z[:, None] + c1 * z[None, :] - f(x)[:, None]) ** 2
            intv = float(wgt @ (inner @ wgt))
            assert abs(nonlinear_gap_1d(f, a1, m1, c1) - (intv - obs)) < 1e-3


def test_criterion_7_tail_bounds():
    with _Report(7, "projection tails: JL check (200,5,3) and bound check (500,4,3)", 120):
        jl = jl_tail_check(m=200, n_dim=5, beta=3.0, trials=100_000, rng_seed=77)
        se3 = 3.0 * np.sqrt(max(jl["empirical_freq"], 1e-5) * (1 - jl["empirical_freq"]) / 100_000)
        print(f"  jl: freq={jl['empirical_freq']:.5f} bound={jl['bound']:.5f}")
        assert jl["empirical_freq"] <= jl["bound"] + se3

        rng = np.random.default_rng(78)
        ell, d = 500, 4
        m = rng.standard_normal((ell, d))
        a = rng.standard_normal(d)
        prob = ConfoundedRegressionProblem(LinearSCM(m, a, np.zeros(ell), 0.0), a, 1.0)
        spec = FunctionClassSpec(kind="linear_ball", b_h=1.0)
        out = theorem3_violation_check(prob, spec, beta=3.0, trials=10_000, rng_seed=79)
        assert out["d_corr"] == 4
        freq, bound = out["violation_freq"], out["prob_bound"]
        se3 = 3.0 * np.sqrt(max(freq, 1e-4) * (1 - freq) / 10_000)
        print(f"  theorem3: freq={freq:.5f} bound={bound:.5f}")
        assert freq <= bound + se3


def test_criterion_8_covariance_law_equivalence():
    with _Report(8, "matched-law first/second moments of covariances over 2000 draws", 120):
        draws = 2000
        out = theorem1_moment_draws(5, 20, sigma_a=0.8, sigma_e=1.5, draws=draws, rng_seed=5)
        for ka, kb in (("s1_xx", "s2_xx"), ("s1_xy", "s2_xy")):
            a = out[ka].reshape(draws, -1)
            b = out[kb].reshape(draws, -1)
            for moment in (lambda t: t, lambda t: t * t):
                ma, mb = moment(a), moment(b)
                diff = np.abs(ma.mean(axis=0) - mb.mean(axis=0))
                se = np.sqrt(
                    ma.var(axis=0, ddof=1) / draws + mb.var(axis=0, ddof=1) / draws
                )
                assert np.all(diff <= 3.0 * np.maximum(se, 1e-12))
