"""Shared numeric data model: datasets, centering, covariance statistics.

Centering divides every column by sqrt(n-1) so that plain inner products of
centered columns are exactly sample covariances; the finite-sample and
population solvers can then share one code path on (sxx, sxy).
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    NonFiniteInput,
    SchemaError,
    ZeroVarianceColumn,
)

NOISE_COLUMN = "__noise"
SOURCE_PREFIX = "__z"


@dataclass
class Dataset:
    """Sample matrix for the predictors plus the response vector.

    ``e`` (per-sample noise values) and ``z`` (per-sample source values) are
    oracle fields carried only by simulated data; estimators never read them.
    Treat instances as immutable; operations return new datasets.
    """

    x: np.ndarray
    y: np.ndarray
    e: np.ndarray | None = None
    z: np.ndarray | None = None
    column_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        if self.x.ndim != 2 or self.y.ndim != 1:
            raise DimensionMismatch("x must be 2-d and y 1-d")
        n = self.x.shape[0]
        if n < 2:
            raise DimensionMismatch(f"need at least 2 samples, got {n}")
        if self.y.shape[0] != n:
            raise DimensionMismatch("x and y disagree on the number of samples")
        if self.e is not None:
            self.e = np.asarray(self.e, dtype=np.float64)
            if self.e.shape != (n,):
                raise DimensionMismatch("e must be an n-vector")
        if self.z is not None:
            self.z = np.asarray(self.z, dtype=np.float64)
            if self.z.ndim != 2 or self.z.shape[0] != n:
                raise DimensionMismatch("z must be an n x ell matrix")
        if not self.column_names:
            self.column_names = [f"x{j}" for j in range(self.x.shape[1])]
        if len(self.column_names) != self.x.shape[1]:
            raise DimensionMismatch("column_names length must match predictor count")
        for arr in (self.x, self.y, self.e, self.z):
            if arr is not None and not np.all(np.isfinite(arr)):
                raise NonFiniteInput("dataset contains non-finite values")

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def d(self):
        return self.x.shape[1]


@dataclass
class CovariancePair:
    """Sufficient statistics for every solver: Sigma_XX and Sigma_XY.

    ``sxe`` is the predictor/noise covariance, available only when the
    dataset carried oracle noise values.
    """

    sxx: np.ndarray
    sxy: np.ndarray
    sxe: np.ndarray | None = None

    def __post_init__(self):
        self.sxx = np.asarray(self.sxx, dtype=np.float64)
        self.sxy = np.asarray(self.sxy, dtype=np.float64)
        d = self.sxy.shape[0]
        if self.sxx.shape != (d, d):
            raise DimensionMismatch("sxx must be d x d matching sxy")
        if self.sxe is not None:
            self.sxe = np.asarray(self.sxe, dtype=np.float64)
            if self.sxe.shape != (d,):
                raise DimensionMismatch("sxe must be a d-vector")
        asym = np.max(np.abs(self.sxx - self.sxx.T)) if d else 0.0
        scale = np.max(np.abs(self.sxx)) if d else 0.0
        if scale > 0 and asym > 1e-10 * scale:
            raise DimensionMismatch("sxx is not symmetric within tolerance")

    @property
    def d(self):
        return self.sxy.shape[0]


@dataclass
class RegressionVector:
    """A candidate coefficient vector with the method and penalty that produced it."""

    coefficients: np.ndarray
    method_tag: str  # one of: ols, ridge, lasso
    lam: float = 0.0

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=np.float64)
        if not np.all(np.isfinite(self.coefficients)):
            raise NonFiniteInput("coefficients contain non-finite values")
        if self.lam < 0:
            raise DimensionMismatch("lambda must be nonnegative")

    @property
    def sq_norm(self):
        return float(self.coefficients @ self.coefficients)


def center_and_scale(data: Dataset, normalize: bool = False) -> Dataset:
    """Center every column and divide by sqrt(n-1); optionally rescale x to unit variance.

    After this transform the squared norm of each x column equals its sample
    variance (exactly 1 when normalized), so x.T @ x is the sample covariance.
    The oracle fields e and z receive the same centering so the sample-level
    covariance identities hold exactly.
    """
    n = data.n
    scale = np.sqrt(n - 1.0)
    xc = (data.x - data.x.mean(axis=0)) / scale
    if normalize:
        col_sq = np.einsum("ij,ij->j", xc, xc)  # sample variances
        bad = np.nonzero(col_sq <= 0.0)[0]
        if bad.size:
            j = int(bad[0])
            raise ZeroVarianceColumn(j, data.column_names[j])
        xc = xc / np.sqrt(col_sq)
    yc = (data.y - data.y.mean()) / scale
    ec = None if data.e is None else (data.e - data.e.mean()) / scale
    zc = None if data.z is None else (data.z - data.z.mean(axis=0)) / scale
    return Dataset(xc, yc, ec, zc, list(data.column_names))


def empirical_covariances(data: Dataset) -> CovariancePair:
    """Covariances of an already centered dataset: sxx = x'x, sxy = x'y.

    The 1/(n-1) convention is absorbed into the centering, so these are the
    usual sample covariance statistics.
    """
    sxx = data.x.T @ data.x
    sxx = 0.5 * (sxx + sxx.T)  # kill rounding drift
    sxy = data.x.T @ data.y
    sxe = None if data.e is None else data.x.T @ data.e
    return CovariancePair(sxx, sxy, sxe)


def drop_columns(data: Dataset, names) -> Dataset:
    """Return a dataset without the named predictor columns."""
    names = set(names)
    missing = names - set(data.column_names)
    if missing:
        raise SchemaError(f"unknown columns to drop: {sorted(missing)}")
    keep = [j for j, c in enumerate(data.column_names) if c not in names]
    return Dataset(
        data.x[:, keep],
        data.y,
        data.e,
        data.z,
        [data.column_names[j] for j in keep],
    )


def read_dataset_csv(path, target: str) -> Dataset:
    """Read a dataset from CSV: header row, one response column named ``target``.

    Optional oracle columns: ``__noise`` and ``__z0 .. __z{ell-1}``.  Comma is
    the documented delimiter; semicolons (as in the raw UCI wine files) are
    accepted as well.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        sample = fh.read(4096)
        fh.seek(0)
        delimiter = ";" if sample.count(";") > sample.count(",") else ","
        reader = csv.reader(fh, delimiter=delimiter)
        rows = [r for r in reader if r]
    if len(rows) < 3:
        raise SchemaError(f"{path}: need a header plus at least 2 data rows")
    header = [h.strip().strip('"') for h in rows[0]]
    if len(set(header)) != len(header):
        raise SchemaError(f"{path}: duplicate column names in header")
    if target not in header:
        raise SchemaError(f"{path}: no column named {target!r} in header {header}")
    z_cols = sorted(
        (h for h in header if h.startswith(SOURCE_PREFIX) and h[len(SOURCE_PREFIX):].isdigit()),
        key=lambda h: int(h[len(SOURCE_PREFIX):]),
    )
    predictor_cols = [
        h for h in header if h != target and h != NOISE_COLUMN and h not in z_cols
    ]
    try:
        body = np.array([[float(v) for v in r] for r in rows[1:]], dtype=np.float64)
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric cell ({exc})") from exc
    if body.shape[1] != len(header):
        raise SchemaError(f"{path}: ragged rows")
    col = {h: body[:, j] for j, h in enumerate(header)}
    x = np.column_stack([col[h] for h in predictor_cols])
    e = col[NOISE_COLUMN] if NOISE_COLUMN in header else None
    z = np.column_stack([col[h] for h in z_cols]) if z_cols else None
    return Dataset(x, col[target], e, z, predictor_cols)
