"""Command-line surface: simulation campaigns, dataset fits, bound checks, plots.

All data goes to files; summaries to stdout; warnings and errors to stderr.
Every command is reproducible from its flags and seed.
"""

import argparse
import os
import sys
import warnings

import numpy as np

from . import bounds as bounds_mod
from . import output
from .concorr import concorr_fit
from .data import (
    center_and_scale,
    drop_columns,
    empirical_covariances,
    read_dataset_csv,
)
from .errors import CausalRegError, SlowConvergenceWarning
from .simulation import (
    DEFAULT_MARGIN,
    DEFAULT_METHODS,
    ExperimentConfig,
    LinearSCM,
    as_generator,
    relative_squared_error,
    run_experiment,
    summarize_rates,
)
from .solvers import DEFAULT_CONFIG, ols_from_cov

THREADS_ENV = "CAUSALREG_THREADS"


def _workers() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    return max(1, int(raw))


def _build_parser():
    p = argparse.ArgumentParser(
        prog="causalreg",
        description="Confounder-corrected regularized regression toolkit",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo campaign and write a results CSV")
    sim.add_argument("--scenario", type=int, choices=(1, 2), default=2)
    sim.add_argument("--d", type=int, default=30, help="predictor dimension")
    sim.add_argument("--l", dest="ell", type=int, default=None, help="source dimension (default: d)")
    sim.add_argument("--n", type=int, default=1000, help="samples per run")
    sim.add_argument("--runs", type=int, default=200)
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--methods", default=",".join(DEFAULT_METHODS))
    sim.add_argument("--margin", type=float, default=DEFAULT_MARGIN)
    sim.add_argument("--normalize", action="store_true")
    sim.add_argument("--sigma-a-range", type=float, nargs=2, default=(0.0, 1.0))
    sim.add_argument("--sigma-c-range", type=float, nargs=2, default=(0.0, 1.0))
    sim.add_argument("--sigma-e-range", type=float, nargs=2, default=(0.0, 5.0))
    sim.add_argument("--out", default="results.csv")

    fit = sub.add_parser("fit", help="confounder-corrected fit of a CSV dataset")
    fit.add_argument("--data", required=True)
    fit.add_argument("--target", default="quality")
    fit.add_argument("--method", choices=("ridge", "lasso"), default="ridge")
    fit.add_argument("--normalize", action="store_true")
    fit.add_argument("--drop", default="", help="comma-separated predictor columns to drop")
    fit.add_argument(
        "--truth-from-full",
        action="store_true",
        help="take the unregularized full-predictor fit as ground truth for the reduced fit",
    )

    bnd = sub.add_parser("bounds", help="Monte Carlo checks of the generalization bound")
    bnd.add_argument("--kind", choices=("theorem3", "jl-tail"), default="theorem3")
    bnd.add_argument("--seed", type=int, required=True)
    bnd.add_argument("--trials", type=int, default=10000)
    bnd.add_argument("--beta", type=float, default=3.0)
    bnd.add_argument("--ell", type=int, default=500)
    bnd.add_argument("--d", type=int, default=4)
    bnd.add_argument("--variance", type=float, default=1.0, help="squared sphere radius V")
    bnd.add_argument("--radius", type=float, default=1.0, help="function class radius b")
    bnd.add_argument("--sigma-e", type=float, default=0.0)
    bnd.add_argument("--m", type=int, default=200, help="ambient dimension (jl-tail)")
    bnd.add_argument("--n-dim", type=int, default=5, help="projection dimension (jl-tail)")
    bnd.add_argument("--out", default="bounds.csv")

    plt = sub.add_parser("plot", help="SVG scatter of method error against unregularized error")
    plt.add_argument("--in", dest="input", required=True)
    plt.add_argument("--out", required=True)
    plt.add_argument("--title", default="")
    return p


def cmd_simulate(args) -> int:
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    cfg = ExperimentConfig(
        scenario=args.scenario,
        d=args.d,
        ell=args.ell if args.ell is not None else args.d,
        n=args.n,
        runs=args.runs,
        seed=args.seed,
        methods=methods,
        margin=args.margin,
        normalize=args.normalize,
        sigma_a_range=tuple(args.sigma_a_range),
        sigma_c_range=tuple(args.sigma_c_range),
        sigma_e_range=tuple(args.sigma_e_range),
        n_workers=_workers(),
    )
    records = run_experiment(cfg)
    output.atomic_write_text(args.out, output.results_csv_text(records, methods))
    rates = summarize_rates(records, methods, args.margin)
    print(f"{'method':<16}{'successes':>10}{'failures':>10}")
    for m in methods:
        s, f = rates[m]
        print(f"{m:<16}{s:>10.3f}{f:>10.3f}")
    print(f"wrote {args.out} ({len(records)} records, seed {args.seed})")
    return 0


def cmd_fit(args) -> int:
    ds_full = read_dataset_csv(args.data, args.target)
    drop = [c.strip() for c in args.drop.split(",") if c.strip()]
    ds = drop_columns(ds_full, drop) if drop else ds_full

    truth = None
    if args.truth_from_full:
        cov_full = empirical_covariances(center_and_scale(ds_full, args.normalize))
        ols_full = ols_from_cov(cov_full, DEFAULT_CONFIG)
        keep = [j for j, c in enumerate(ds_full.column_names) if c not in drop]
        truth = ols_full.coefficients[keep]

    res = concorr_fit(ds, args.method, args.normalize, DEFAULT_CONFIG)
    for note in res.warnings:
        print(f"warning: {note}", file=sys.stderr)

    cov = empirical_covariances(center_and_scale(ds, args.normalize))
    ols = ols_from_cov(cov, DEFAULT_CONFIG)

    print(f"data: {args.data}")
    print(f"n: {ds.n}")
    print(f"predictors: {ds.d}" + (f" (dropped: {','.join(drop)})" if drop else ""))
    print(f"method: {args.method}")
    print(f"normalized: {str(args.normalize).lower()}")
    print(f"beta_hat: {res.beta_hat:.6f}")
    print(f"lambda: {res.lam:.8g}")
    print(f"target_sq_norm: {res.target_sq_norm:.8g}")
    if truth is not None:
        print(f"err_unreg_vs_truth: {relative_squared_error(ols.coefficients, truth):.6f}")
        print(f"err_concorr_vs_truth: {relative_squared_error(res.vector.coefficients, truth):.6f}")
    coefs = ",".join(
        f"{name}={val:.8g}" for name, val in zip(ds.column_names, res.vector.coefficients)
    )
    print(f"coefficients: {coefs}")
    return 0


def cmd_bounds(args) -> int:
    if args.kind == "jl-tail":
        result = bounds_mod.jl_tail_check(args.m, args.n_dim, args.beta, args.trials, args.seed)
        print(f"empirical_freq: {result['empirical_freq']:.6f}")
        print(f"bound: {result['bound']:.6f}")
        return 0
    rng = as_generator(args.seed)
    m = rng.standard_normal((args.ell, args.d))
    a = rng.standard_normal(args.d)
    scm = LinearSCM(m, a, np.zeros(args.ell), args.sigma_e)
    problem = bounds_mod.ConfoundedRegressionProblem(scm, a, args.variance)
    spec = bounds_mod.FunctionClassSpec(kind="linear_ball", b_h=args.radius)
    result = bounds_mod.theorem3_violation_check(problem, spec, args.beta, args.trials, rng)
    output.atomic_write_text(args.out, output.bounds_csv_text(result))
    print(f"d_corr: {result['d_corr']}")
    print(f"margin: {result['margin']:.6g}")
    print(f"violation_freq: {result['violation_freq']:.6f}")
    print(f"prob_bound: {result['prob_bound']:.6f}")
    print(f"wrote {args.out} ({args.trials} trials, seed {args.seed})")
    return 0


def cmd_plot(args) -> int:
    rows = output.read_results_rows(args.input)
    output.atomic_write_text(args.out, output.scatter_svg_text(rows, args.title))
    print(f"wrote {args.out} ({len(rows)} points)")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    warnings.simplefilter("default")
    # per-fold solver stalls are numerical noise at campaign scale
    warnings.filterwarnings("ignore", category=SlowConvergenceWarning)
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "fit":
            return cmd_fit(args)
        if args.command == "bounds":
            return cmd_bounds(args)
        return cmd_plot(args)
    except (CausalRegError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
