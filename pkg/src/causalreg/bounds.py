"""Interventional vs observational losses and the causal generalization check.

For the whitened linear-Gaussian confounder model (sources Z with identity
covariance feeding both X = Z M and the response shift Z c) both losses have
closed forms, and their difference reduces to a covariance contraction:

    interventional - observational = 2 (w - a)' M' c.

The quadratic expansion of the loss produces the cross terms with a factor
2, so the gap carries it as well; the internal identity check and the bound
margin below use this exact form.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DimensionTooSmall
from .simulation import LinearSCM, as_generator

RANK_TOL = 1e-8


@dataclass
class ConfoundedRegressionProblem:
    """Whitened confounded problem: Y = X a + E + Z c with Sigma_ZZ = I.

    ``g_coefficients`` are the coefficients of the interventional regression
    target g(x) = E[Y'|x]; equal to the structural ``a`` in the linear case.
    ``variance_v`` is the squared radius of the sphere the confounding
    vector is drawn from in the bound check.
    """

    scm: LinearSCM
    g_coefficients: np.ndarray
    variance_v: float

    def __post_init__(self):
        self.g_coefficients = np.asarray(self.g_coefficients, dtype=np.float64)
        if self.g_coefficients.shape != (self.scm.d,):
            raise DimensionMismatch("g_coefficients must match the predictor dimension")
        if self.variance_v < 0:
            raise DimensionMismatch("variance_v must be nonnegative")


@dataclass
class FunctionClassSpec:
    """Either a finite set of linear predictors or a ball around the target.

    ``b`` is the uniform bound on ||(f - g)(X)||; for the ball it defaults to
    the ball radius ``b_h`` (measured in the Sigma_XX seminorm, which equals
    that function-space norm for linear f), and for a finite set it defaults
    to the tightest valid bound over the members.
    """

    kind: str  # finite_linear_set | linear_ball
    weights: np.ndarray | None = None
    b_h: float | None = None
    b: float | None = None

    def __post_init__(self):
        if self.kind not in ("finite_linear_set", "linear_ball"):
            raise DimensionMismatch(f"unknown function class kind {self.kind!r}")
        if self.kind == "finite_linear_set":
            if self.weights is None:
                raise DimensionMismatch("finite_linear_set needs weights")
            self.weights = np.atleast_2d(np.asarray(self.weights, dtype=np.float64))
        else:
            if self.b_h is None or self.b_h < 0:
                raise DimensionMismatch("linear_ball needs a nonnegative radius b_h")
        if self.b is not None and self.b < 0:
            raise DimensionMismatch("b must be nonnegative")


def observational_loss(problem: ConfoundedRegressionProblem, w) -> float:
    """E[(Y - X w)^2] under the joint observational distribution."""
    w = np.asarray(w, dtype=np.float64)
    m, c = problem.scm.m, problem.scm.c
    md = m @ (problem.g_coefficients - w)
    return float(md @ md + 2.0 * md @ c + c @ c + problem.scm.sigma_e**2)


def interventional_loss(problem: ConfoundedRegressionProblem, w) -> float:
    """E[(Y - X w)^2] when X is set by intervention and averaged over its marginal.

    The sources are independent of the intervened predictor value, so the
    cross term of the observational loss vanishes.
    """
    w = np.asarray(w, dtype=np.float64)
    md = problem.scm.m @ (problem.g_coefficients - w)
    c = problem.scm.c
    return float(md @ md + c @ c + problem.scm.sigma_e**2)


def loss_gap_lemma1(problem: ConfoundedRegressionProblem, w) -> float:
    """Interventional minus observational loss as a covariance contraction.

    Returns 2 (w - a)' M' c and verifies it against the closed-form loss
    difference to 1e-10 before returning.
    """
    w = np.asarray(w, dtype=np.float64)
    gap = float(2.0 * (problem.scm.m @ (w - problem.g_coefficients)) @ problem.scm.c)
    direct = interventional_loss(problem, w) - observational_loss(problem, w)
    if abs(gap - direct) > 1e-10 * max(1.0, abs(gap)):
        raise AssertionError(
            f"covariance form {gap!r} disagrees with the loss difference {direct!r}"
        )
    return gap


def correlation_dimension(cov_fz: np.ndarray, tol: float = RANK_TOL) -> int:
    """Dimension of the span of the per-function covariance vectors with Z.

    ``cov_fz`` holds one row per function: cov(f_i(X), Z_j) over j.  The
    result is the numerical rank at the relative singular value threshold.
    """
    cov_fz = np.atleast_2d(np.asarray(cov_fz, dtype=np.float64))
    if cov_fz.size == 0:
        return 0
    s = np.linalg.svd(cov_fz, compute_uv=False)
    if s.size == 0 or s[0] <= 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def jl_tail_check(m: int, n_dim: int, beta: float, trials: int, rng_seed=0):
    """Empirical tail of a random unit vector's squared projection norm.

    Draws unit vectors uniformly on the sphere in R^m, projects onto a fixed
    n_dim-dimensional coordinate subspace, and reports the frequency of
    ||P v||^2 >= beta * n_dim / m next to the exponential tail bound
    exp(n_dim * (1 - beta + ln beta) / 2).
    """
    if not 1 <= n_dim <= m:
        raise DimensionMismatch("need 1 <= n_dim <= m")
    if beta <= 1.0:
        raise DimensionMismatch("beta must exceed 1")
    if trials < 1:
        raise DimensionMismatch("trials must be >= 1")
    rng = as_generator(rng_seed)
    threshold = beta * n_dim / m
    hits = 0
    remaining = trials
    while remaining > 0:  # draw in blocks to keep memory flat at large trial counts
        block = min(remaining, 50_000)
        g = rng.standard_normal((block, m))
        frac = np.einsum("ij,ij->i", g[:, :n_dim], g[:, :n_dim]) / np.einsum(
            "ij,ij->i", g, g
        )
        hits += int(np.sum(frac >= threshold))
        remaining -= block
    bound = float(np.exp(n_dim * (1.0 - beta + np.log(beta)) / 2.0))
    return {"empirical_freq": hits / trials, "bound": bound}


def _class_geometry(problem: ConfoundedRegressionProblem, spec: FunctionClassSpec):
    """Return (d_corr, b, sup_gap_fn) where sup_gap_fn maps a trial matrix of
    confounding vectors (trials x ell) to per-trial suprema of the loss gap."""
    m = problem.scm.m
    if spec.kind == "linear_ball":
        u, s, _ = np.linalg.svd(m, full_matrices=False)
        basis = u[:, s > RANK_TOL * s[0]] if s.size and s[0] > 0 else u[:, :0]
        d_corr = basis.shape[1]
        b = spec.b if spec.b is not None else float(spec.b_h)

        def sup_gap(cs):
            # sup over ||M(w-a)|| <= b of 2 (M(w-a))' c = 2 b ||proj_im(M) c||
            return 2.0 * b * np.linalg.norm(cs @ basis, axis=1)

        return d_corr, b, sup_gap

    diffs = spec.weights - problem.g_coefficients  # one (w_i - a) per member
    cov_rows = diffs @ m.T  # rows are cov((f_i - g)(X), Z)
    d_corr = correlation_dimension(cov_rows)
    norms = np.linalg.norm(cov_rows, axis=1)
    b = spec.b if spec.b is not None else float(norms.max(initial=0.0))

    def sup_gap(cs):
        return 2.0 * np.max(cov_rows @ cs.T, axis=0)

    return d_corr, b, sup_gap


def theorem3_violation_check(
    problem: ConfoundedRegressionProblem,
    class_spec: FunctionClassSpec,
    beta: float,
    trials: int,
    rng_seed=0,
):
    """Monte Carlo check of the causal generalization bound.

    Each trial draws the confounding vector uniformly from the radius-sqrt(V)
    sphere, computes the supremum over the class of (interventional -
    observational loss), and compares it against the margin
    2 b sqrt(V beta (d_corr + 1) / ell).  The reported probability bound is
    exp((d_corr + 1)(1 - beta + ln beta)/2) for the event that the margin is
    exceeded; slack_stats holds quantiles of (margin - supremum).
    """
    if beta <= 1.0:
        raise DimensionMismatch("beta must exceed 1")
    if trials < 1:
        raise DimensionMismatch("trials must be >= 1")
    ell = problem.scm.ell
    d_corr, b, sup_gap_fn = _class_geometry(problem, class_spec)
    if ell <= d_corr:
        raise DimensionTooSmall(f"need ell > d_corr, got ell={ell}, d_corr={d_corr}")
    v = problem.variance_v
    margin = float(2.0 * b * np.sqrt(v * beta * (d_corr + 1) / ell))

    rng = as_generator(rng_seed)
    g = rng.standard_normal((trials, ell))
    cs = np.sqrt(v) * g / np.linalg.norm(g, axis=1, keepdims=True)
    sup_gaps = sup_gap_fn(cs)
    violated = sup_gaps > margin
    n_dim = d_corr + 1
    prob_bound = float(np.exp(n_dim * (1.0 - beta + np.log(beta)) / 2.0))
    slack = margin - sup_gaps
    qs = (0.0, 0.25, 0.5, 0.75, 1.0)
    slack_stats = {f"q{int(100 * q):02d}": float(np.quantile(slack, q)) for q in qs}
    return {
        "violation_freq": float(np.mean(violated)),
        "prob_bound": prob_bound,
        "slack_stats": slack_stats,
        "d_corr": d_corr,
        "margin": margin,
        "sup_gaps": sup_gaps,
        "violated": violated,
    }


def gaussian_grid(points: int = 2001, span: float = 8.0):
    """Symmetric grid over +-span standard deviations with normalized normal weights."""
    z = np.linspace(-span, span, points)
    w = np.exp(-0.5 * z * z)
    return z, w / w.sum()


def nonlinear_gap_1d(f, a_coef: float, m_scale: float, c_scale: float,
                     points: int = 2001, span: float = 8.0) -> float:
    """Covariance-form loss gap for a scalar problem with a nonlinear predictor.

    One source feeds X = m Z; the gap of f against the linear target
    g(x) = a x is 2 cov((f - g)(X), Z) c, evaluated on a discretized source
    distribution.  This exercises the general path that has no closed form.
    """
    z, w = gaussian_grid(points, span)
    x = m_scale * z
    diff = f(x) - a_coef * x
    mean_diff = float(w @ diff)
    mean_z = float(w @ z)  # 0 on the symmetric grid
    cov = float(w @ (diff * z)) - mean_diff * mean_z
    return 2.0 * cov * c_scale
