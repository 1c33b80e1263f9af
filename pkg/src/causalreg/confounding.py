"""Spectral confounding-strength estimation.

The unregularized coefficient vector of a linearly confounded system is
distributed N(0, sigma_a^2 I + sigma_c^2 Sigma_XX^{-1}): the more it
concentrates in small-eigenvalue eigenspaces of Sigma_XX, the stronger the
confounding.  Rotating into the eigenbasis turns this into independent
scalar observations v_j ~ N(0, sigma_a^2 + sigma_c^2 / eigval_j), and the
two variance parameters are fitted by maximum likelihood.  The confounding
strength is then the population ratio

    beta = sigma_c^2 * sum(1/eigval) / (sigma_c^2 * sum(1/eigval) + sigma_a^2 * d).
"""

from dataclasses import dataclass

import numpy as np

from .errors import AllEigenvaluesTruncated, DimensionMismatch, NonFiniteLikelihood

GRID_POINTS = 64
COORD_REFINE_RTOL = 1e-8
DEGENERATE_SPREAD = 1.01
DEFAULT_RTOL = 1e-10


@dataclass
class ConfoundingEstimate:
    sigma_a_sq: float
    sigma_c_sq: float
    beta_hat: float
    log_likelihood: float
    degenerate_flag: bool = False


def _log_likelihood(sa, sc, lam, v2):
    """Gaussian log-likelihood of v_j ~ N(0, sa + sc/lam_j), up to constants."""
    s = sa + sc / lam
    if np.any(s <= 0.0):
        return -np.inf
    return float(-0.5 * np.sum(np.log(s) + v2 / s))


def _ll_batch_sa(sa_grid, sc, lam, v2):
    s = sa_grid[:, None] + sc / lam[None, :]
    return -0.5 * np.sum(np.log(s) + v2[None, :] / s, axis=1)


def _ll_batch_sc(sa, sc_grid, lam, v2):
    s = sa + sc_grid[:, None] / lam[None, :]
    return -0.5 * np.sum(np.log(s) + v2[None, :] / s, axis=1)


def _zoom_max(batch_ll, lo, hi):
    """Maximize a 1-d slice by repeatedly zooming a log-spaced grid."""
    best_x, best_f = lo, -np.inf
    for _ in range(80):
        grid = np.geomspace(lo, hi, GRID_POINTS)
        vals = batch_ll(grid)
        i = int(np.argmax(vals))
        if vals[i] > best_f:
            best_f, best_x = float(vals[i]), float(grid[i])
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, GRID_POINTS - 1)]
        if hi / lo < 1.0 + COORD_REFINE_RTOL:
            break
    return best_x, best_f


def _coordinate_ascent(sa0, sc0, lam, v2, sa_range, sc_range):
    sa, sc = sa0, sc0
    ll = _log_likelihood(sa, sc, lam, v2)
    for _ in range(60):
        sa, _ = _zoom_max(lambda g: _ll_batch_sa(g, sc, lam, v2), *sa_range)
        sc, ll_new = _zoom_max(lambda g: _ll_batch_sc(sa, g, lam, v2), *sc_range)
        if ll_new <= ll + 1e-10 * (1.0 + abs(ll)):
            ll = max(ll, ll_new)
            break
        ll = ll_new
    # Pattern polish: move along +-5% steps until no single move improves, so
    # the returned point is a strict local maximum on that neighbor grid.
    for _ in range(400):
        moved = False
        for fa in (0.95, 1.0, 1.05):
            for fc in (0.95, 1.0, 1.05):
                if fa == 1.0 and fc == 1.0:
                    continue
                cand = _log_likelihood(sa * fa, sc * fc, lam, v2)
                if cand > ll:
                    sa, sc, ll = sa * fa, sc * fc, cand
                    moved = True
        if not moved:
            break
    return sa, sc, ll


def _beta_from_variances(sa, sc, inv_sum, d):
    num = sc * inv_sum
    den = num + sa * d
    if den <= 0.0:
        return 0.0
    return float(min(max(num / den, 0.0), 1.0))


def estimate_confounding_strength(
    sxx: np.ndarray, a_hat: np.ndarray, rtol: float = DEFAULT_RTOL
) -> ConfoundingEstimate:
    """Fit (sigma_a^2, sigma_c^2) by maximum likelihood and report beta_hat.

    Eigenvalues of sxx at or below rtol * max eigenvalue are truncated.  The
    optimizer is a deterministic, derivative-free coordinate ascent over
    (log sigma_a^2, log sigma_c^2) from four spread starting points, with the
    exact boundary solutions (either variance pinned to zero) also evaluated.
    A nearly isotropic spectrum makes the two parameters non-identifiable; in
    that case degenerate_flag is set and the tie-break returns beta_hat = 0.
    """
    sxx = np.asarray(sxx, dtype=np.float64)
    a_hat = np.asarray(a_hat, dtype=np.float64)
    d = a_hat.shape[0]
    if d < 2:
        raise DimensionMismatch("need at least 2 predictors to estimate confounding")
    if sxx.shape != (d, d):
        raise DimensionMismatch("sxx must be d x d matching a_hat")
    if not (np.all(np.isfinite(sxx)) and np.all(np.isfinite(a_hat))):
        raise NonFiniteLikelihood("non-finite inputs")

    vals, vecs = np.linalg.eigh(sxx)
    vmax = float(vals[-1])
    if vmax <= 0.0:
        raise AllEigenvaluesTruncated("sxx has no positive eigenvalues")
    keep = vals > rtol * vmax
    if not np.any(keep):
        raise AllEigenvaluesTruncated("all eigenvalues below the truncation threshold")
    lam = vals[keep]
    v = vecs[:, keep].T @ a_hat
    v2 = v * v

    if not np.any(v2 > 0.0):
        ll = np.inf  # variance-free observations: likelihood unbounded at zero
        return ConfoundingEstimate(0.0, 0.0, 0.0, ll, False)

    m2 = float(np.mean(v2))
    inv_sum = float(np.sum(1.0 / lam))

    if float(lam[-1] / lam[0]) < DEGENERATE_SPREAD:
        ll = _log_likelihood(m2, 0.0, lam, v2)
        return ConfoundingEstimate(m2, 0.0, 0.0, ll, True)

    # Optimize on v2 rescaled to unit mean so the trajectory (grid placement,
    # stopping tests) is independent of the data scale; exact equivariance.
    v2n = v2 / m2
    v2max = float(np.max(v2n))
    lam_gm = float(np.exp(np.mean(np.log(lam))))
    sa_range = (1e-12, v2max * 10.0)
    sc_range = (float(lam[0]) * 1e-12, v2max * float(lam[-1]) * 10.0)

    # Exact boundary fits: sigma_c^2 = 0 and sigma_a^2 = 0 have closed forms.
    sc_pure = float(np.mean(v2n * lam))
    candidates = [
        (1.0, 0.0, _log_likelihood(1.0, 0.0, lam, v2n)),
        (0.0, sc_pure, _log_likelihood(0.0, sc_pure, lam, v2n)),
    ]
    starts = [
        (1.0, lam_gm * 1e-6),
        (1.0, lam_gm * 1e-2),
        (1e-2, lam_gm),
        (1e-6, lam_gm * 1e2),
    ]
    for sa0, sc0 in starts:
        candidates.append(_coordinate_ascent(sa0, sc0, lam, v2n, sa_range, sc_range))

    sa_n, sc_n, _ = max(candidates, key=lambda t: t[2])
    sa, sc = m2 * sa_n, m2 * sc_n
    ll = _log_likelihood(sa, sc, lam, v2)
    if not np.isfinite(ll):
        raise NonFiniteLikelihood("likelihood did not evaluate to a finite value")
    beta = _beta_from_variances(sa, sc, inv_sum, d)
    return ConfoundingEstimate(float(sa), float(sc), beta, float(ll), False)


def causal_norm_target(est: ConfoundingEstimate, a_hat: np.ndarray) -> float:
    """Squared-length target for the causal coefficient vector: (1 - beta) * ||a_hat||^2."""
    if not 0.0 <= est.beta_hat <= 1.0:
        raise DimensionMismatch("beta_hat must lie in [0, 1]")
    a_hat = np.asarray(a_hat, dtype=np.float64)
    return float((1.0 - est.beta_hat) * (a_hat @ a_hat))
