"""Hot numeric kernels.

The lasso coordinate-descent sweep dominates runtime in the Monte Carlo
tables (it runs once per lambda evaluation inside the norm search and the
cross-validation grids), so it is compiled with numba when available.
Setting the environment variable ``CAUSALREG_NO_NUMBA=1`` selects the pure
numpy implementation instead; both paths are exported so the benchmark and
the equivalence tests can compare them directly.
"""

import os

import numpy as np

_ENV_FLAG = os.environ.get("CAUSALREG_NO_NUMBA", "").strip().lower()
FORCE_NUMPY = _ENV_FLAG in ("1", "true", "yes", "on")

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap


def lasso_cd_numpy(sxx, sxy, lam, max_sweeps, tol, coef0):
    """Cyclic coordinate descent for lam*||a||_1 - 2*a'sxy + a'sxx*a.

    Returns (coef, sweeps_used, converged, last_max_delta).  ``coef0`` is the
    warm start and is not mutated.  Coordinates with nonpositive curvature
    (zero diagonal of a PSD matrix implies a zero row) are pinned to 0.
    """
    d = sxy.shape[0]
    half = 0.5 * lam
    coef = coef0.copy()
    grad = sxx @ coef  # running sxx @ coef, updated per coordinate
    sweeps = 0
    max_delta = np.inf
    for sweeps in range(1, max_sweeps + 1):
        max_delta = 0.0
        for j in range(d):
            ajj = sxx[j, j]
            old = coef[j]
            if ajj <= 0.0:
                new = 0.0
            else:
                r = sxy[j] - (grad[j] - ajj * old)
                if r > half:
                    new = (r - half) / ajj
                elif r < -half:
                    new = (r + half) / ajj
                else:
                    new = 0.0
            delta = new - old
            if delta != 0.0:
                coef[j] = new
                grad += sxx[:, j] * delta
                ad = abs(delta)
                if ad > max_delta:
                    max_delta = ad
        if max_delta < tol:
            return coef, sweeps, True, max_delta
    return coef, sweeps, False, max_delta


@njit(cache=True, nogil=True)
def _lasso_cd_jit(sxx, sxy, lam, max_sweeps, tol, coef0):
    d = sxy.shape[0]
    half = 0.5 * lam
    coef = coef0.copy()
    grad = np.zeros(d)
    for i in range(d):
        acc = 0.0
        for k in range(d):
            acc += sxx[i, k] * coef[k]
        grad[i] = acc
    sweeps = 0
    max_delta = np.inf
    for sweeps in range(1, max_sweeps + 1):
        max_delta = 0.0
        for j in range(d):
            ajj = sxx[j, j]
            old = coef[j]
            if ajj <= 0.0:
                new = 0.0
            else:
                r = sxy[j] - (grad[j] - ajj * old)
                if r > half:
                    new = (r - half) / ajj
                elif r < -half:
                    new = (r + half) / ajj
                else:
                    new = 0.0
            delta = new - old
            if delta != 0.0:
                coef[j] = new
                for i in range(d):
                    grad[i] += sxx[i, j] * delta
                ad = abs(delta)
                if ad > max_delta:
                    max_delta = ad
        if max_delta < tol:
            return coef, sweeps, True, max_delta
    return coef, sweeps, False, max_delta


def lasso_cd_numba(sxx, sxy, lam, max_sweeps, tol, coef0):
    """numba-compiled variant of :func:`lasso_cd_numpy` (same contract)."""
    coef, sweeps, converged, max_delta = _lasso_cd_jit(
        np.ascontiguousarray(sxx, dtype=np.float64),
        np.ascontiguousarray(sxy, dtype=np.float64),
        float(lam),
        int(max_sweeps),
        float(tol),
        np.ascontiguousarray(coef0, dtype=np.float64),
    )
    return coef, int(sweeps), bool(converged), float(max_delta)


USING_NUMBA = HAS_NUMBA and not FORCE_NUMPY

if USING_NUMBA:
    lasso_cd = lasso_cd_numba
else:
    lasso_cd = lasso_cd_numpy
