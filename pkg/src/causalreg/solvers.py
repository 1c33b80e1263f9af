"""Covariance-only OLS / ridge / lasso solvers and the coefficient-norm lambda search.

All solvers consume only (sxx, sxy), so the same code serves finite-sample
statistics and population covariances.  The lasso objective is implemented
exactly as  lam*||a||_1 + ||y - X a||^2  with no 1/2 or 1/n factors, which
makes the soft threshold lam/2; this is deliberately documented to avoid
convention drift against other ecosystems.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .data import CovariancePair, RegressionVector
from .errors import (
    BracketingFailure,
    DimensionMismatch,
    NoConvergence,
    NormFloorWarning,
    SingularSystemWarning,
    TargetAboveOlsWarning,
)

NORM_FLOOR = 1e-12
NORM_MATCH_RTOL = 1e-6
MAX_BRACKET_STEPS = 200


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 100_000
    tolerance: float = 1e-10
    pseudoinverse_rtol: float | None = None  # None resolves to 1e-12 * d

    def __post_init__(self):
        if self.max_iterations < 1:
            raise DimensionMismatch("max_iterations must be >= 1")
        if self.tolerance <= 0:
            raise DimensionMismatch("tolerance must be > 0")

    def effective_rtol(self, d: int) -> float:
        if self.pseudoinverse_rtol is not None:
            return self.pseudoinverse_rtol
        return 1e-12 * d


DEFAULT_CONFIG = SolverConfig()


class _Spectrum:
    """Eigendecomposition of sxx with the truncated-pseudoinverse policy.

    Caches the rotated right-hand side so ridge coefficients and their
    squared norms are O(d) per lambda during bracketing and bisection.
    """

    def __init__(self, cov: CovariancePair, cfg: SolverConfig):
        vals, vecs = np.linalg.eigh(cov.sxx)
        rtol = cfg.effective_rtol(cov.d)
        vmax = float(vals[-1]) if vals.size else 0.0
        keep = vals > max(vmax, 0.0) * rtol if vmax > 0 else np.zeros_like(vals, bool)
        self.vals = vals[keep]
        self.vecs = vecs[:, keep]
        self.w = self.vecs.T @ cov.sxy
        self.full_rank = bool(keep.all()) and vmax > 0
        self.d = cov.d

    def ridge_coef(self, lam: float) -> np.ndarray:
        if self.vals.size == 0:
            return np.zeros(self.d)
        return self.vecs @ (self.w / (self.vals + lam))

    def ridge_sq_norm(self, lam: float) -> float:
        if self.vals.size == 0:
            return 0.0
        r = self.w / (self.vals + lam)
        return float(r @ r)


def ols_from_cov(cov: CovariancePair, cfg: SolverConfig = DEFAULT_CONFIG) -> RegressionVector:
    """Least squares through the truncated pseudoinverse of sxx.

    Eigenvalues below effective_rtol * max eigenvalue are discarded, which
    yields the minimum-norm solution on rank-deficient systems.
    """
    spec = _Spectrum(cov, cfg)
    return RegressionVector(spec.ridge_coef(0.0), "ols", 0.0)


def ridge_from_cov(
    cov: CovariancePair, lam: float, cfg: SolverConfig = DEFAULT_CONFIG
) -> RegressionVector:
    """Unique minimizer of lam*||a||^2 + ||y - X a||^2, i.e. (sxx + lam I)^-1 sxy.

    At lam = 0 on a rank-deficient sxx the solve falls back to the
    pseudoinverse and emits :class:`SingularSystemWarning`.
    """
    if lam < 0:
        raise DimensionMismatch("lambda must be nonnegative")
    if lam == 0.0:
        spec = _Spectrum(cov, cfg)
        if not spec.full_rank:
            warnings.warn(
                "sxx is rank deficient at lambda=0; using pseudoinverse",
                SingularSystemWarning,
                stacklevel=2,
            )
        return RegressionVector(spec.ridge_coef(0.0), "ridge", 0.0)
    coef = np.linalg.solve(cov.sxx + lam * np.eye(cov.d), cov.sxy)
    return RegressionVector(coef, "ridge", lam)


def lasso_from_cov(
    cov: CovariancePair,
    lam: float,
    cfg: SolverConfig = DEFAULT_CONFIG,
    warm_start: np.ndarray | None = None,
) -> RegressionVector:
    """Minimize lam*||a||_1 - 2 a'sxy + a'sxx a by cyclic coordinate descent.

    Converged when the largest coefficient change over a full sweep drops
    below cfg.tolerance; raises :class:`NoConvergence` (carrying the last
    iterate) when the sweep budget runs out.
    """
    if lam < 0:
        raise DimensionMismatch("lambda must be nonnegative")
    coef0 = np.zeros(cov.d) if warm_start is None else np.asarray(warm_start, float)
    if coef0.shape != (cov.d,):
        raise DimensionMismatch("warm_start must be a d-vector")
    coef, _, converged, max_delta = kernels.lasso_cd(
        cov.sxx, cov.sxy, float(lam), int(cfg.max_iterations), cfg.tolerance, coef0
    )
    if not converged:
        raise NoConvergence(cfg.max_iterations, coef, max_delta)
    return RegressionVector(coef, "lasso", lam)


def lasso_objective(cov: CovariancePair, coef: np.ndarray, lam: float) -> float:
    """lam*||a||_1 - 2 a'sxy + a'sxx a (the ||y||^2 constant is dropped)."""
    return float(lam * np.abs(coef).sum() - 2.0 * coef @ cov.sxy + coef @ cov.sxx @ coef)


PROBE_SWEEPS = 30_000  # per-evaluation cap inside the lambda search


class _NormEvaluator:
    """Squared coefficient norm as a function of lambda, with warm starts for lasso."""

    def __init__(self, cov, method, cfg):
        if method not in ("ridge", "lasso"):
            raise DimensionMismatch(f"method must be ridge or lasso, got {method!r}")
        self.cov = cov
        self.method = method
        self.cfg = cfg
        self.probe_cfg = SolverConfig(
            max_iterations=min(cfg.max_iterations, PROBE_SWEEPS),
            tolerance=cfg.tolerance,
            pseudoinverse_rtol=cfg.pseudoinverse_rtol,
        )
        self.spec = _Spectrum(cov, cfg)
        self.stalled = False
        self._warm = None

    def solve(self, lam: float) -> RegressionVector:
        if self.method == "ridge":
            # spectral form so the lam -> 0 limit matches the pseudoinverse OLS
            return RegressionVector(self.spec.ridge_coef(lam), "ridge", lam)
        try:
            vec = lasso_from_cov(self.cov, lam, self.probe_cfg, warm_start=self._warm)
        except NoConvergence as exc:
            # A stall just above the max-change tolerance is harmless here:
            # the search verifies the measured norm of the returned iterate.
            self.stalled = True
            vec = RegressionVector(exc.coefficients, "lasso", lam)
        self._warm = vec.coefficients
        return vec

    def sq_norm(self, lam: float) -> float:
        if self.method == "ridge":
            return self.spec.ridge_sq_norm(lam)
        return self.solve(lam).sq_norm


def solution_norm_curve(cov, method, lambdas, cfg: SolverConfig = DEFAULT_CONFIG):
    """Evaluate (lambda, squared norm) along an ascending lambda grid.

    The squared norms must be non-increasing along the grid; a violation
    beyond rounding noise indicates a solver defect and raises.
    """
    lambdas = [float(l) for l in lambdas]
    if any(l < 0 for l in lambdas):
        raise DimensionMismatch("lambdas must be nonnegative")
    if any(b < a for a, b in zip(lambdas, lambdas[1:])):
        raise DimensionMismatch("lambdas must be ascending")
    ev = _NormEvaluator(cov, method, cfg)
    out = []
    prev = None
    for lam in lambdas:
        sq = ev.sq_norm(lam)
        if prev is not None and sq > prev + 1e-9 * (1.0 + prev):
            raise AssertionError(
                f"squared norm increased along the lambda grid at {lam}: {prev} -> {sq}"
            )
        out.append((lam, sq))
        prev = sq
    return out


def solve_lambda_for_norm(
    cov, method, target_sq_norm: float, cfg: SolverConfig = DEFAULT_CONFIG
):
    """Find lambda whose solution has the requested squared norm.

    Geometric bracketing from lambda = 1e-8 followed by bisection on log
    lambda; the match tolerance is 1e-6 relative.  Targets at or above the
    unregularized norm clamp to lambda = 0 (with a warning when strictly
    above); a target of 0 returns the smallest bracketed lambda whose
    squared norm is below 1e-12.
    """
    if target_sq_norm < 0:
        raise DimensionMismatch("target squared norm must be nonnegative")
    ev = _NormEvaluator(cov, method, cfg)
    ols_sq = ev.spec.ridge_sq_norm(0.0)
    tol = NORM_MATCH_RTOL * max(target_sq_norm, NORM_FLOOR)

    def at(lam):
        vec = ev.solve(lam)
        return vec, vec.sq_norm

    # lambda = 0 already matches (or the target is unreachable): clamp.
    if ols_sq <= NORM_FLOOR or target_sq_norm >= ols_sq - tol:
        if target_sq_norm > ols_sq * (1.0 + 1e-12) + NORM_FLOOR:
            warnings.warn(
                f"target squared norm {target_sq_norm:.6g} exceeds the "
                f"unregularized norm {ols_sq:.6g}; clamped to lambda=0",
                TargetAboveOlsWarning,
                stacklevel=2,
            )
        return 0.0, RegressionVector(ev.spec.ridge_coef(0.0), method, 0.0)

    if target_sq_norm <= NORM_FLOOR:
        lam = 1e-8
        for _ in range(MAX_BRACKET_STEPS):
            vec, sq = at(lam)
            if sq < NORM_FLOOR:
                if abs(sq - target_sq_norm) > tol:
                    warnings.warn(
                        "norm target at the numerical floor; returning smallest "
                        f"lambda with squared norm < {NORM_FLOOR:g}",
                        NormFloorWarning,
                        stacklevel=2,
                    )
                return lam, vec
            lam *= 2.0
        raise BracketingFailure(
            f"no lambda with squared norm below {NORM_FLOOR:g} after "
            f"{MAX_BRACKET_STEPS} doublings"
        )

    # Bracket: lo has norm above target, hi at or below.
    lo = None
    hi = None
    lam = 1e-8
    vec, sq = at(lam)
    if abs(sq - target_sq_norm) <= tol:
        return lam, vec
    if sq <= target_sq_norm:
        # Already past the target at the smallest probe; halve downward.
        hi, hi_pair = lam, (vec, sq)
        for _ in range(MAX_BRACKET_STEPS):
            lam *= 0.5
            vec, sq = at(lam)
            if abs(sq - target_sq_norm) <= tol:
                return lam, vec
            if sq > target_sq_norm:
                lo = lam
                break
            hi, hi_pair = lam, (vec, sq)
        if lo is None:
            # The solution norm plateaus below the target all the way down:
            # the target is numerically at the unregularized norm, so clamp.
            warnings.warn(
                f"target squared norm {target_sq_norm:.6g} sits between the "
                f"small-lambda plateau and the unregularized norm {ols_sq:.6g}; "
                "clamped to lambda=0",
                NormFloorWarning,
                stacklevel=2,
            )
            return 0.0, RegressionVector(ev.spec.ridge_coef(0.0), method, 0.0)
    else:
        lo = lam
        for _ in range(MAX_BRACKET_STEPS):
            lam *= 2.0
            vec, sq = at(lam)
            if sq <= target_sq_norm:
                hi, hi_pair = lam, (vec, sq)
                break
            lo = lam
        else:
            raise BracketingFailure(
                f"squared norm still above target after {MAX_BRACKET_STEPS} doublings"
            )

    if abs(hi_pair[1] - target_sq_norm) <= tol:
        return hi, hi_pair[0]
    best_lam, best_pair = hi, hi_pair
    for _ in range(400):
        mid = float(np.sqrt(lo * hi))
        vec, sq = at(mid)
        if abs(sq - target_sq_norm) < abs(best_pair[1] - target_sq_norm):
            best_lam, best_pair = mid, (vec, sq)
        if abs(sq - target_sq_norm) <= tol:
            return mid, vec
        if sq > target_sq_norm:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1.0 + 1e-15:
            break
    # Continuity makes the loop above terminate in practice; fall back to the
    # closest evaluation if the interval collapsed first.
    warnings.warn(
        f"norm match stopped at |gap|={abs(best_pair[1] - target_sq_norm):.3e} "
        f"(tolerance {tol:.3e})",
        NormFloorWarning,
        stacklevel=2,
    )
    return best_lam, best_pair[0]
