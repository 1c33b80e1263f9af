"""Data generators, evaluation metrics, and the Monte Carlo experiment runner.

Two generating regimes share one linear structural model: the unconfounded
regime draws predictors directly (or mixes sources with a zero confounding
vector), while the confounded regime routes both the predictors and the
response noise through a shared source vector Z via a random mixing matrix.
Seeding uses a counter-based generator with per-run substreams derived from
(seed, run_id), so serial and parallel execution produce identical output.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .concorr import LOO, concorr_fit, cv_baseline_fit
from .data import Dataset, center_and_scale, empirical_covariances
from .errors import DimensionMismatch, EmptyRecords
from .solvers import DEFAULT_CONFIG, SolverConfig, ols_from_cov

DEFAULT_METHODS = ("concorr-ridge", "concorr-lasso", "cv-ridge", "cv-lasso")
DEFAULT_MARGIN = 0.05


@dataclass
class LinearSCM:
    """Ground-truth generative model: X = Z M, Y = X a + Z c + E."""

    m: np.ndarray
    a: np.ndarray
    c: np.ndarray
    sigma_e: float
    sigma_a: float = float("nan")
    sigma_c: float = float("nan")

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=np.float64)
        self.a = np.asarray(self.a, dtype=np.float64)
        self.c = np.asarray(self.c, dtype=np.float64)
        if self.m.ndim != 2:
            raise DimensionMismatch("mixing matrix must be 2-d")
        ell, d = self.m.shape
        if self.a.shape != (d,) or self.c.shape != (ell,):
            raise DimensionMismatch("a must be d-dim and c ell-dim for an ell x d mixing matrix")
        if self.sigma_e < 0:
            raise DimensionMismatch("sigma_e must be nonnegative")

    @property
    def d(self):
        return self.m.shape[1]

    @property
    def ell(self):
        return self.m.shape[0]


@dataclass
class SimulatedInstance:
    data: Dataset
    scm: LinearSCM
    beta_true: float


@dataclass
class ExperimentRecord:
    """Per-run, per-regression-family metrics; absent entries are NaN."""

    run_id: int
    sigma_a: float
    sigma_c: float
    sigma_e: float
    beta_true: float
    beta_hat: float
    err_unreg: float
    err_concorr: float
    err_cv: float
    lambda_concorr: float
    lambda_cv: float
    method: str  # regression family: ridge or lasso


def as_generator(rng_seed) -> np.random.Generator:
    if isinstance(rng_seed, np.random.Generator):
        return rng_seed
    return np.random.Generator(np.random.Philox(rng_seed))


def substream(seed: int, run_id: int) -> np.random.Generator:
    """Independent per-run stream; counter-based so scheduling cannot matter."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(run_id),))
    return np.random.Generator(np.random.Philox(ss))


def beta_from_scm(scm: LinearSCM) -> float:
    """Confounding strength of the population regression vector of an SCM."""
    shift = np.linalg.pinv(scm.m) @ scm.c
    return relative_squared_error(scm.a + shift, scm.a)


def _uniform(rng, lo_hi):
    lo, hi = float(lo_hi[0]), float(lo_hi[1])
    if hi < lo:
        raise DimensionMismatch("range must be (low, high) with low <= high")
    return float(rng.uniform(lo, hi)) if hi > lo else lo


def gen_scenario2(
    d: int,
    ell: int,
    n: int,
    sigma_a_range=(0.0, 1.0),
    sigma_c_range=(0.0, 1.0),
    sigma_e_range=(0.0, 5.0),
    rng_seed=0,
) -> SimulatedInstance:
    """Confounded instance: X = Z M with shared sources also driving the noise.

    One standard-normal mixing matrix per call; sigma_a, sigma_c, sigma_e are
    drawn uniformly from their ranges, then a ~ N(0, sigma_a^2 I),
    c ~ N(0, sigma_c^2 I) and Y = X a + Z c + E with E ~ N(0, sigma_e^2).
    The oracle noise column stores Y - X a, so the empirical covariance
    identities hold exactly on the generated sample.
    """
    rng = as_generator(rng_seed)
    m = rng.standard_normal((ell, d))
    z = rng.standard_normal((n, ell))
    sigma_a = _uniform(rng, sigma_a_range)
    sigma_c = _uniform(rng, sigma_c_range)
    sigma_e = _uniform(rng, sigma_e_range)
    a = sigma_a * rng.standard_normal(d)
    c = sigma_c * rng.standard_normal(ell)
    noise = sigma_e * rng.standard_normal(n)
    x = z @ m
    y = x @ a + z @ c + noise
    scm = LinearSCM(m, a, c, sigma_e, sigma_a, sigma_c)
    data = Dataset(x, y, e=y - x @ a, z=z)
    return SimulatedInstance(data, scm, beta_from_scm(scm))


def gen_scenario1(
    d: int,
    n: int,
    sigma_a_range=(0.0, 1.0),
    sigma_e_range=(0.0, 5.0),
    rng_seed=0,
) -> SimulatedInstance:
    """Unconfounded instance with i.i.d. standard-normal predictor rows.

    Equivalent to the mixing model with an identity mixing matrix and a zero
    confounding vector, so beta_true = 0.
    """
    rng = as_generator(rng_seed)
    x = rng.standard_normal((n, d))
    sigma_a = _uniform(rng, sigma_a_range)
    sigma_e = _uniform(rng, sigma_e_range)
    a = sigma_a * rng.standard_normal(d)
    noise = sigma_e * rng.standard_normal(n)
    y = x @ a + noise
    scm = LinearSCM(np.eye(d), a, np.zeros(d), sigma_e, sigma_a, 0.0)
    data = Dataset(x, y, e=noise)
    return SimulatedInstance(data, scm, 0.0)


def relative_squared_error(a_prime, a_true) -> float:
    """||a' - a||^2 / (||a' - a||^2 + ||a||^2); 0 when both vectors vanish."""
    a_prime = np.asarray(a_prime, dtype=np.float64)
    a_true = np.asarray(a_true, dtype=np.float64)
    diff = a_prime - a_true
    dd = float(diff @ diff)
    aa = float(a_true @ a_true)
    if dd == 0.0:
        return 0.0
    return dd / (dd + aa)


def success_failure_rates(records, margin: float = DEFAULT_MARGIN, method_field: str = "concorr"):
    """Fractions of runs beating / losing to both baselines by the margin.

    The baselines are the unregularized error and the trivial error 1/2.
    Success: err <= min(err_unreg, 0.5) - margin (below both); failure:
    err exceeds at least one baseline by the margin.
    """
    if margin <= 0:
        raise DimensionMismatch("margin must be positive")
    if method_field not in ("concorr", "cv"):
        raise DimensionMismatch("method_field must be concorr or cv")
    errs = []
    for r in records:
        e = r.err_concorr if method_field == "concorr" else r.err_cv
        if np.isfinite(e):
            errs.append((e, r.err_unreg))
    if not errs:
        raise EmptyRecords("no records with the requested method error")
    succ = sum(1 for e, u in errs if e <= min(u, 0.5) - margin)
    fail = sum(1 for e, u in errs if e > min(u, 0.5) + margin)
    return succ / len(errs), fail / len(errs)


@dataclass
class ExperimentConfig:
    scenario: int
    d: int
    ell: int
    n: int
    runs: int
    seed: int
    methods: tuple = DEFAULT_METHODS
    margin: float = DEFAULT_MARGIN
    normalize: bool = False
    sigma_a_range: tuple = (0.0, 1.0)
    sigma_c_range: tuple = (0.0, 1.0)
    sigma_e_range: tuple = (0.0, 5.0)
    cv_folds_lasso: int = 10
    n_workers: int = 1
    solver: SolverConfig = field(default_factory=lambda: DEFAULT_CONFIG)

    def __post_init__(self):
        if self.scenario not in (1, 2):
            raise DimensionMismatch("scenario must be 1 or 2")
        if self.runs < 1:
            raise DimensionMismatch("runs must be >= 1")
        for m in self.methods:
            parse_method(m)


def parse_method(method: str):
    """Split a method string like concorr-ridge into (selector, family)."""
    try:
        selector, family = method.split("-")
    except ValueError:
        selector, family = "", ""
    if selector not in ("concorr", "cv") or family not in ("ridge", "lasso"):
        raise DimensionMismatch(
            f"unknown method {method!r}; expected "
            "concorr-ridge, concorr-lasso, cv-ridge or cv-lasso"
        )
    return selector, family


def _single_run(cfg: ExperimentConfig, run_id: int):
    rng = substream(cfg.seed, run_id)
    sigma_c_range = (0.0, 0.0) if cfg.scenario == 1 else cfg.sigma_c_range
    inst = gen_scenario2(
        cfg.d, cfg.ell, cfg.n,
        cfg.sigma_a_range, sigma_c_range, cfg.sigma_e_range, rng,
    )
    a_true = inst.scm.a
    centered = center_and_scale(inst.data, normalize=False)
    cov = empirical_covariances(centered)
    ols = ols_from_cov(cov, cfg.solver)
    err_unreg = relative_squared_error(ols.coefficients, a_true)

    def unscale(coef):
        # fits on normalized columns estimate a_j * std_j; the column squared
        # norms of the centered (pre-normalization) design are the variances
        if not cfg.normalize:
            return coef
        return coef / np.sqrt(np.einsum("ij,ij->j", centered.x, centered.x))

    wanted = {}
    for m in cfg.methods:
        selector, family = parse_method(m)
        wanted.setdefault(family, set()).add(selector)

    records = []
    for family in ("ridge", "lasso"):
        if family not in wanted:
            continue
        beta_hat = err_concorr = lam_concorr = float("nan")
        err_cv = lam_cv = float("nan")
        if "concorr" in wanted[family]:
            res = concorr_fit(inst.data, family, cfg.normalize, cfg.solver)
            beta_hat = res.beta_hat
            err_concorr = relative_squared_error(unscale(res.vector.coefficients), a_true)
            lam_concorr = res.lam
        if "cv" in wanted[family]:
            folds = LOO if family == "ridge" else cfg.cv_folds_lasso
            lam_cv, vec = cv_baseline_fit(
                inst.data, family, folds=folds, cfg=cfg.solver, normalize=cfg.normalize
            )
            err_cv = relative_squared_error(unscale(vec.coefficients), a_true)
        records.append(
            ExperimentRecord(
                run_id=run_id,
                sigma_a=inst.scm.sigma_a,
                sigma_c=inst.scm.sigma_c,
                sigma_e=inst.scm.sigma_e,
                beta_true=inst.beta_true,
                beta_hat=beta_hat,
                err_unreg=err_unreg,
                err_concorr=err_concorr,
                err_cv=err_cv,
                lambda_concorr=lam_concorr,
                lambda_cv=lam_cv,
                method=family,
            )
        )
    return records


def run_experiment(cfg: ExperimentConfig):
    """Execute the configured runs; output is identical for any worker count."""
    if cfg.n_workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.n_workers) as pool:
            per_run = list(pool.map(lambda r: _single_run(cfg, r), range(cfg.runs)))
    else:
        per_run = [_single_run(cfg, r) for r in range(cfg.runs)]
    return [rec for recs in per_run for rec in recs]


def summarize_rates(records, methods, margin: float = DEFAULT_MARGIN):
    """Success/failure rates keyed by method string, in the given order."""
    out = {}
    for m in methods:
        selector, family = parse_method(m)
        fam_records = [r for r in records if r.method == family]
        out[m] = success_failure_rates(fam_records, margin, selector)
    return out


def theorem1_moment_draws(d: int, ell: int, sigma_a: float, sigma_e: float, draws: int, rng_seed=0):
    """Paired covariance draws for the sample/population equivalence check.

    Side 1 draws ell i.i.d. predictor rows and forms sample covariances; side
    2 draws the mixing matrix and confounding vector from the matched laws
    (centered, scaled sample matrices) and forms population covariances.
    Returns stacked (sxx, sxy) arrays for both sides.
    """
    rng = as_generator(rng_seed)
    n = ell
    s1_xx = np.empty((draws, d, d))
    s1_xy = np.empty((draws, d))
    s2_xx = np.empty((draws, d, d))
    s2_xy = np.empty((draws, d))
    scale = np.sqrt(n - 1.0)
    for i in range(draws):
        x = rng.standard_normal((n, d))
        noise = sigma_e * rng.standard_normal(n)
        a1 = sigma_a * rng.standard_normal(d)
        y = x @ a1 + noise
        cov = empirical_covariances(center_and_scale(Dataset(x, y)))
        s1_xx[i] = cov.sxx
        s1_xy[i] = cov.sxy

        g = rng.standard_normal((n, d))
        m = (g - g.mean(axis=0)) / scale
        ge = sigma_e * rng.standard_normal(n)
        c = (ge - ge.mean()) / scale
        a2 = sigma_a * rng.standard_normal(d)
        sxx = m.T @ m
        s2_xx[i] = sxx
        s2_xy[i] = sxx @ a2 + m.T @ c
    return {"s1_xx": s1_xx, "s1_xy": s1_xy, "s2_xx": s2_xx, "s2_xy": s2_xy}
