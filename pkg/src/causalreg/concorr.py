"""Confounder-corrected regression pipeline and cross-validated baselines.

The pipeline is: center/scale -> covariances -> unregularized fit ->
confounding-strength estimate -> coefficient-norm target -> lambda search ->
final regularized fit.  Cross-validation is provided as the comparison
baseline; it tunes lambda for prediction, which is deliberately weaker
regularization than the confounding correction applies.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .confounding import causal_norm_target, estimate_confounding_strength
from .data import Dataset, RegressionVector, center_and_scale, empirical_covariances
from .errors import (
    DegenerateSpectrumWarning,
    EmptyGrid,
    FoldTooSmall,
    NoConvergence,
    SlowConvergenceWarning,
)
from .solvers import (
    DEFAULT_CONFIG,
    SolverConfig,
    _Spectrum,
    lasso_from_cov,
    ols_from_cov,
    solve_lambda_for_norm,
)

LOO = "loo"
CV_GRID_SIZE = 40
CV_GRID_SPAN = (1e-6, 1e3)  # scaled by tr(sxx)/d
CV_SCORING_TOL = 1e-8  # held-out scores are insensitive below this
CV_SCORING_SWEEPS = 5000  # per-solve cap while scoring the grid


def _lasso_tolerant(cov, lam, cfg, warm):
    """Lasso solve that accepts a near-tolerance stall (fold scoring / refits)."""
    try:
        return lasso_from_cov(cov, lam, cfg, warm_start=warm)
    except NoConvergence as exc:
        warnings.warn(
            f"coordinate descent stalled at max change {exc.max_delta:.2e} "
            f"for lambda={lam:.3e}; using the last iterate",
            SlowConvergenceWarning,
            stacklevel=3,
        )
        return RegressionVector(exc.coefficients, "lasso", lam)


@dataclass
class ConCorrResult:
    vector: RegressionVector
    beta_hat: float
    target_sq_norm: float
    lam: float
    normalized: bool
    warnings: list[str] = field(default_factory=list)


def concorr_fit(
    data: Dataset,
    method: str,
    normalize: bool = False,
    cfg: SolverConfig = DEFAULT_CONFIG,
) -> ConCorrResult:
    """Run the full confounder-corrected fit; deterministic given inputs.

    Any clamps or identifiability issues along the way are recorded as
    strings in the result's ``warnings`` list.
    """
    centered = center_and_scale(data, normalize)
    cov = empirical_covariances(centered)
    notes: list[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ols = ols_from_cov(cov, cfg)
        if float(np.max(np.abs(ols.coefficients))) == 0.0:
            est_beta, target = 0.0, 0.0
            vec = RegressionVector(np.zeros(cov.d), method, 0.0)
            lam = 0.0
        else:
            est = estimate_confounding_strength(cov.sxx, ols.coefficients)
            if est.degenerate_flag:
                warnings.warn(
                    "covariance spectrum is nearly isotropic; confounding "
                    "strength is not identifiable (tie-break beta=0)",
                    DegenerateSpectrumWarning,
                    stacklevel=2,
                )
            est_beta = est.beta_hat
            target = causal_norm_target(est, ols.coefficients)
            lam, vec = solve_lambda_for_norm(cov, method, target, cfg)
    notes.extend(str(w.message) for w in caught)
    return ConCorrResult(vec, est_beta, target, lam, normalize, notes)


def default_lambda_grid(sxx: np.ndarray, size: int = CV_GRID_SIZE) -> np.ndarray:
    """Log-spaced lambda grid scaled to the average predictor variance."""
    scale = float(np.trace(sxx)) / sxx.shape[0]
    if scale <= 0:
        scale = 1.0
    return np.geomspace(CV_GRID_SPAN[0] * scale, CV_GRID_SPAN[1] * scale, size)


def _loo_ridge_scores(centered: Dataset, spec: _Spectrum, grid):
    """Exact leave-one-out mean squared residual for ridge at every grid lambda.

    Uses the hat-matrix identity e_loo = e / (1 - h); exact for ridge because
    the penalty corresponds to appended pseudo-rows that are never held out.
    """
    px = centered.x @ spec.vecs  # n x r, rotated design
    py = spec.w  # r
    scores = np.empty(len(grid))
    for i, lam in enumerate(grid):
        den = spec.vals + lam
        coef_rot = py / den
        resid = centered.y - px @ coef_rot
        h = np.einsum("ij,ij->i", px, px / den[None, :])
        scores[i] = float(np.mean((resid / (1.0 - h)) ** 2))
    return scores


def _kfold_scores(centered: Dataset, method: str, folds: int, grid, cfg):
    n = centered.n
    if folds < 2 or folds > n:
        raise FoldTooSmall(f"folds must be in [2, {n}], got {folds}")
    scoring_cfg = SolverConfig(
        max_iterations=min(cfg.max_iterations, CV_SCORING_SWEEPS),
        tolerance=max(cfg.tolerance, CV_SCORING_TOL),
        pseudoinverse_rtol=cfg.pseudoinverse_rtol,
    )
    blocks = np.array_split(np.arange(n), folds)
    totals = np.zeros(len(grid))
    order = range(len(grid) - 1, -1, -1)  # strong-to-weak keeps warm starts cheap
    for held in blocks:
        mask = np.ones(n, dtype=bool)
        mask[held] = False
        xtr, ytr = centered.x[mask], centered.y[mask]
        cov_tr = empirical_covariances(Dataset(xtr, ytr, column_names=centered.column_names))
        xte, yte = centered.x[held], centered.y[held]
        warm = None
        for i in order:
            lam = grid[i]
            if method == "ridge":
                coef = np.linalg.solve(
                    cov_tr.sxx + lam * np.eye(cov_tr.d), cov_tr.sxy
                ) if lam > 0 else ols_from_cov(cov_tr, cfg).coefficients
            else:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", SlowConvergenceWarning)
                    vec = _lasso_tolerant(cov_tr, lam, scoring_cfg, warm)
                warm = vec.coefficients
                coef = vec.coefficients
            resid = yte - xte @ coef
            totals[i] += float(resid @ resid)
    return totals / n


def cv_baseline_fit(
    data: Dataset,
    method: str,
    folds=LOO,
    lambda_grid=None,
    cfg: SolverConfig = DEFAULT_CONFIG,
    normalize: bool = False,
):
    """Pick lambda by cross-validated held-out squared error, then refit on all data.

    ``folds`` is a positive integer or ``"loo"`` for leave-one-out (closed
    form for ridge).  Returns (lambda, RegressionVector).
    """
    centered = center_and_scale(data, normalize)
    cov = empirical_covariances(centered)
    if lambda_grid is None:
        grid = default_lambda_grid(cov.sxx)
    else:
        grid = np.asarray([float(l) for l in lambda_grid], dtype=np.float64)
    if grid.size == 0:
        raise EmptyGrid("lambda grid is empty")

    if folds == LOO and method == "ridge":
        spec = _Spectrum(cov, cfg)
        scores = _loo_ridge_scores(centered, spec, grid)
    else:
        k = centered.n if folds == LOO else int(folds)
        scores = _kfold_scores(centered, method, k, grid, cfg)

    best = int(np.argmin(scores))
    lam = float(grid[best])
    if method == "ridge":
        spec = _Spectrum(cov, cfg)
        vec = RegressionVector(spec.ridge_coef(lam), "ridge", lam)
    else:
        vec = _lasso_tolerant(cov, lam, cfg, None)
    return lam, vec
