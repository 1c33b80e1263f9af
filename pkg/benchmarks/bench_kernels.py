#!/usr/bin/env python3
"""Benchmark the lasso coordinate-descent kernel: numba JIT vs pure numpy.

Times a realistic workload (the covariance-form solves issued by a lambda
search on a d=30 problem) on both backends regardless of the
CAUSALREG_NO_NUMBA setting, and prints the per-solve time and speedup.

Usage: python3 benchmarks/bench_kernels.py [--d 30] [--repeats 5]
"""

import argparse
import time

import numpy as np

from causalreg.data import Dataset, center_and_scale, empirical_covariances
from causalreg.kernels import HAS_NUMBA, lasso_cd_numba, lasso_cd_numpy


def make_problem(d, n, seed):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, d))
    m = rng.standard_normal((d, d))
    x = z @ m
    y = x @ rng.standard_normal(d) + z @ rng.standard_normal(d) + rng.standard_normal(n)
    cov = empirical_covariances(center_and_scale(Dataset(x, y)))
    return cov.sxx, cov.sxy


def workload(kernel, sxx, sxy, lambdas):
    warm = np.zeros(sxy.shape[0])
    sweeps = 0
    for lam in lambdas:
        coef, used, _, _ = kernel(sxx, sxy, lam, 50_000, 1e-10, warm)
        warm = coef
        sweeps += used
    return sweeps


def bench(kernel, sxx, sxy, lambdas, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        sweeps = workload(kernel, sxx, sxy, lambdas)
        times.append(time.perf_counter() - t0)
    return min(times), sweeps


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--d", type=int, default=30)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--grid", type=int, default=40)
    args = ap.parse_args()

    sxx, sxy = make_problem(args.d, args.n, seed=0)
    scale = np.trace(sxx) / args.d
    lambdas = np.geomspace(1e-6 * scale, 1e3 * scale, args.grid)[::-1]

    if HAS_NUMBA:
        workload(lasso_cd_numba, sxx, sxy, lambdas)  # JIT warmup outside timing

    t_np, sweeps = bench(lasso_cd_numpy, sxx, sxy, lambdas, args.repeats)
    print(f"problem: d={args.d}, {args.grid}-point lambda path, {sweeps} total sweeps")
    print(f"numpy : {t_np:8.4f}s  ({1e3 * t_np / args.grid:7.3f} ms/solve)")
    if HAS_NUMBA:
        t_nb, _ = bench(lasso_cd_numba, sxx, sxy, lambdas, args.repeats)
        print(f"numba : {t_nb:8.4f}s  ({1e3 * t_nb / args.grid:7.3f} ms/solve)")
        print(f"speedup: {t_np / t_nb:.1f}x")
    else:
        print("numba : not installed")


if __name__ == "__main__":
    main()
