"""Skew-normal and skew-t distributions in the direct parameterization.

Parameters are (xi, Omega, alpha) plus optional degrees of freedom nu;
nu absent means skew-normal.  The scalar case is stored as d = 1 with a
1x1 scale matrix holding omega^2, so one code path serves both.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import integrate, linalg, special

from .specfun import t_logcdf, zeta0

__all__ = [
    "DirectParams",
    "Dataset",
    "sn_logpdf",
    "st_logpdf",
    "sample",
    "alpha_star",
    "delta_of_alpha",
    "skewness_gamma1",
    "prob_negative",
    "prob_divergent_mle",
    "canonical_matrix",
    "canonical_transform",
]

_LOG2 = np.log(2.0)
_LOG2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class DirectParams:
    """Parameter vector (xi, Omega, alpha[, nu]) of a skew-normal / skew-t model.

    xi and alpha are length-d vectors, omega_mat is the d x d symmetric
    positive-definite scale matrix (omega^2 in the 1x1 scalar case), and
    nu, when present, selects the skew-t family.
    """

    xi: np.ndarray
    omega_mat: np.ndarray
    alpha: np.ndarray
    nu: float | None = None

    def __post_init__(self):
        xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        alpha = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        omega_mat = np.atleast_2d(np.asarray(self.omega_mat, dtype=float))
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "omega_mat", omega_mat)
        d = xi.shape[0]
        if xi.ndim != 1 or alpha.shape != (d,) or omega_mat.shape != (d, d):
            raise ValueError(
                f"inconsistent dimensions: xi {xi.shape}, alpha {alpha.shape}, "
                f"omega_mat {omega_mat.shape}"
            )
        if not (np.all(np.isfinite(xi)) and np.all(np.isfinite(alpha))
                and np.all(np.isfinite(omega_mat))):
            raise ValueError("parameters must be finite")
        if not np.allclose(omega_mat, omega_mat.T, rtol=0, atol=1e-8 * max(1.0, float(np.abs(omega_mat).max()))):
            raise ValueError("omega_mat must be symmetric")
        try:
            np.linalg.cholesky(omega_mat)
        except np.linalg.LinAlgError as exc:
            raise ValueError("omega_mat must be positive definite") from exc
        if self.nu is not None:
            nu = float(self.nu)
            if not np.isfinite(nu) or nu <= 0:
                raise ValueError(f"nu must be positive, got {self.nu!r}")
            object.__setattr__(self, "nu", nu)

    @classmethod
    def scalar(cls, xi: float, omega: float, alpha: float, nu: float | None = None) -> "DirectParams":
        """Univariate constructor taking omega as a standard deviation."""
        if omega <= 0:
            raise ValueError(f"omega must be positive, got {omega!r}")
        return cls(xi=np.array([float(xi)]), omega_mat=np.array([[float(omega) ** 2]]),
                   alpha=np.array([float(alpha)]), nu=nu)

    @property
    def d(self) -> int:
        return self.xi.shape[0]

    @property
    def is_skew_t(self) -> bool:
        return self.nu is not None

    @property
    def omega_diag(self) -> np.ndarray:
        """Vector of marginal scale parameters (sqrt of the diagonal of Omega)."""
        return np.sqrt(np.diag(self.omega_mat))

    @property
    def omega(self) -> float:
        """Scalar omega; only valid for d = 1."""
        if self.d != 1:
            raise ValueError("scalar omega is defined only for d = 1")
        return float(np.sqrt(self.omega_mat[0, 0]))

    @property
    def omega_bar(self) -> np.ndarray:
        """Correlation matrix omega^-1 Omega omega^-1."""
        s = self.omega_diag
        return self.omega_mat / np.outer(s, s)


@dataclass(frozen=True)
class Dataset:
    """An n x d matrix of observations, one row per observation."""

    rows: np.ndarray = field(repr=False)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim == 1:
            rows = rows[:, None]
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise ValueError(f"rows must be a nonempty 2-D array, got shape {np.shape(self.rows)}")
        if not np.all(np.isfinite(rows)):
            raise ValueError("observations must be finite")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    def column(self, j: int = 0) -> np.ndarray:
        return self.rows[:, j]

    @classmethod
    def from_csv(cls, path_or_file) -> "Dataset":
        """Read observations from CSV: one row per observation, optional header.

        Raises ValueError naming the offending row number on malformed input.
        """
        if hasattr(path_or_file, "read"):
            return cls._parse_csv(path_or_file, getattr(path_or_file, "name", "<stream>"))
        with open(path_or_file, "r", encoding="utf-8", newline="") as fh:
            return cls._parse_csv(fh, os.fspath(path_or_file))

    @classmethod
    def _parse_csv(cls, fh, name) -> "Dataset":
        rows = []
        width = None
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            try:
                values = [float(cell) for cell in record]
            except ValueError:
                if lineno == 1 and not rows:
                    continue  # header line
                raise ValueError(f"{name}: malformed row {lineno}: {record!r}") from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ValueError(
                    f"{name}: row {lineno} has {len(values)} columns, expected {width}"
                )
            rows.append(values)
        if not rows:
            raise ValueError(f"{name}: no numeric rows found")
        return cls(rows=np.asarray(rows, dtype=float))

    def to_csv(self, path_or_file) -> None:
        if hasattr(path_or_file, "write"):
            self._write_csv(path_or_file)
        else:
            with open(path_or_file, "w", encoding="utf-8", newline="") as fh:
                self._write_csv(fh)

    def _write_csv(self, fh) -> None:
        writer = csv.writer(fh)
        for row in self.rows:
            writer.writerow([format(v, ".17g") for v in row])

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        self._write_csv(buf)
        return buf.getvalue()


def _check_x(x, d):
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
        squeeze = True
    elif arr.ndim == 1:
        # for d = 1 a flat vector is n scalar observations; otherwise one point
        if d == 1:
            squeeze = arr.shape[0] == 1
            arr = arr[:, None]
        else:
            squeeze = True
            arr = arr[None, :]
    elif arr.ndim == 2:
        squeeze = False
    else:
        raise ValueError(f"x must be at most 2-D, got shape {arr.shape}")
    if arr.shape[1] != d:
        raise ValueError(f"x has dimension {arr.shape[1]}, parameters have {d}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("x must be finite")
    return arr, squeeze


def _mahalanobis_and_logdet(v, omega_mat):
    chol = np.linalg.cholesky(omega_mat)
    sol = linalg.solve_triangular(chol, v.T, lower=True)
    return np.sum(sol * sol, axis=0), 2.0 * np.sum(np.log(np.diag(chol)))


def sn_logpdf(x, params: DirectParams):
    """Log density of the (multivariate) skew-normal distribution.

    log of 2 phi_d(x - xi; Omega) Phi(alpha' omega^-1 (x - xi)); the
    Phi factor is evaluated through the stable log-CDF.
    """
    if params.is_skew_t:
        raise ValueError("params carry nu; use st_logpdf")
    arr, squeeze = _check_x(x, params.d)
    v = arr - params.xi
    qx, logdet = _mahalanobis_and_logdet(v, params.omega_mat)
    u = (v / params.omega_diag) @ params.alpha
    out = -0.5 * params.d * _LOG2PI - 0.5 * logdet - 0.5 * qx + zeta0(u)
    return float(out[0]) if squeeze else out


def st_logpdf(x, params: DirectParams):
    """Log density of the (multivariate) skew-t distribution.

    log of 2 t_d(x - xi; Omega, nu) T(sqrt((d + nu)/(Q + nu)) alpha'
    omega^-1 (x - xi); nu + d) with Q the squared Mahalanobis distance.
    Converges pointwise to the skew-normal log density as nu -> inf.
    """
    if not params.is_skew_t:
        raise ValueError("params carry no nu; use sn_logpdf")
    arr, squeeze = _check_x(x, params.d)
    d, nu = params.d, params.nu
    v = arr - params.xi
    qx, logdet = _mahalanobis_and_logdet(v, params.omega_mat)
    u = (v / params.omega_diag) @ params.alpha
    log_td = (
        special.gammaln((nu + d) / 2.0)
        - special.gammaln(nu / 2.0)
        - 0.5 * d * np.log(nu * np.pi)
        - 0.5 * logdet
        - 0.5 * (nu + d) * np.log1p(qx / nu)
    )
    out = _LOG2 + log_td + t_logcdf(u * np.sqrt((d + nu) / (qx + nu)), nu + d)
    return float(out[0]) if squeeze else out


def _delta_vector(params: DirectParams) -> np.ndarray:
    omega_bar = params.omega_bar
    a_star_sq = float(params.alpha @ omega_bar @ params.alpha)
    return (omega_bar @ params.alpha) / np.sqrt(1.0 + a_star_sq)


def sample(params: DirectParams, n: int, seed) -> Dataset:
    """Draw n i.i.d. observations, deterministically for a given seed.

    Uses the convolution representation Z = delta |U0| + sqrt-factor U1
    of the skew-normal; skew-t draws divide the centered part by
    sqrt(V/nu) with V chi-square on nu degrees of freedom.
    ``seed`` may be an int, a SeedSequence, or a Generator.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    d = params.d
    delta = _delta_vector(params)
    resid_cov = params.omega_bar - np.outer(delta, delta)
    try:
        chol = np.linalg.cholesky(resid_cov)
    except np.linalg.LinAlgError:
        chol = np.linalg.cholesky(resid_cov + 1e-12 * np.eye(d))
    u0 = np.abs(rng.standard_normal(n))
    z = u0[:, None] * delta + rng.standard_normal((n, d)) @ chol.T
    if params.is_skew_t:
        v = rng.chisquare(params.nu, size=n) / params.nu
        z = z / np.sqrt(v)[:, None]
    return Dataset(rows=params.xi + z * params.omega_diag)


def alpha_star(params: DirectParams) -> float:
    """Scalar shape summary sqrt(alpha' Omega-bar alpha); zero iff alpha = 0."""
    return float(np.sqrt(params.alpha @ params.omega_bar @ params.alpha))


def delta_of_alpha(alpha: float) -> float:
    """delta(alpha) = alpha / sqrt(1 + alpha^2), odd and strictly in (-1, 1)."""
    alpha = float(alpha)
    if not np.isfinite(alpha):
        raise ValueError("alpha must be finite")
    return alpha / np.sqrt(1.0 + alpha * alpha)


def skewness_gamma1(alpha: float) -> float:
    """Index of skewness of the scalar skew-normal with shape ``alpha``.

    Accepts +-inf as a sentinel for the half-normal boundary, where the
    index reaches its extreme value of about +-0.99527.
    """
    alpha = float(alpha)
    if np.isnan(alpha):
        raise ValueError("alpha must not be NaN")
    delta = np.sign(alpha) if np.isinf(alpha) else delta_of_alpha(alpha)
    mu = delta * np.sqrt(2.0 / np.pi)
    return float((4.0 - np.pi) / 2.0 * mu**3 / (1.0 - mu * mu) ** 1.5)


def prob_negative(alpha: float) -> float:
    """P{Z < 0} for Z ~ SN(0, 1, alpha), by quadrature of the density.

    Equals 1/2 - arctan(alpha)/pi: the mass below zero shrinks as alpha
    grows, vanishing in the half-normal limit.
    """
    alpha = float(alpha)
    if not np.isfinite(alpha):
        raise ValueError("alpha must be finite")

    def integrand(u):
        return np.exp(zeta0(-alpha * u) - 0.5 * u * u - 0.5 * _LOG2PI)

    value, _ = integrate.quad(integrand, 0.0, np.inf, epsabs=1e-12, limit=200)
    return float(value)


def prob_divergent_mle(n: int, alpha: float) -> float:
    """Probability that all n draws from SN(0, 1, alpha) share one sign.

    That event is exactly the one producing an unbounded shape MLE in the
    one-parameter model.  Symmetric in alpha <-> -alpha, decreasing in n.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be at least 1")
    alpha = float(alpha)
    if not np.isfinite(alpha):
        raise ValueError("alpha must be finite")
    p = 0.5 - np.arctan(alpha) / np.pi
    return float(p**n + (1.0 - p) ** n)


class CanonicalBasis(NamedTuple):
    transform: np.ndarray   # right-multiplies standardized rows
    rotation: np.ndarray    # orthogonal P, first column along C alpha
    chol_factor: np.ndarray  # C with C'C = Omega-bar
    alpha_star: float


def canonical_matrix(omega_bar: np.ndarray, alpha: np.ndarray) -> CanonicalBasis:
    """Build the linear map sending SN(0, Omega-bar, alpha) to independent coordinates.

    Factor Omega-bar = C'C (upper-triangular Cholesky) and complete the
    unit vector along C alpha to an orthogonal P by a Householder
    reflection.  Rows transform as z (C^-1 P); the first output
    coordinate is then SN(0, 1, alpha-star) and the rest are N(0, 1).
    """
    omega_bar = np.asarray(omega_bar, dtype=float)
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    d = alpha.shape[0]
    if np.allclose(alpha, 0.0):
        raise ValueError("canonical transformation is undefined for alpha = 0")
    try:
        c = linalg.cholesky(omega_bar, lower=False)  # omega_bar = c' c
    except linalg.LinAlgError as exc:
        raise ValueError("omega_bar must be positive definite") from exc
    ca = c @ alpha
    a_star = float(np.linalg.norm(ca))
    v = ca / a_star
    e1 = np.zeros(d)
    e1[0] = 1.0
    w = v - e1
    wn = float(w @ w)
    if wn < 1e-24:
        p = np.eye(d)
    else:
        p = np.eye(d) - 2.0 * np.outer(w, w) / wn
    transform = linalg.solve_triangular(c, p, lower=False)
    return CanonicalBasis(transform=transform, rotation=p, chol_factor=c, alpha_star=a_star)


def canonical_transform(data: Dataset, params: DirectParams) -> tuple[Dataset, float]:
    """Rotate a skew-normal sample into canonical coordinates.

    Rows are first centered by xi and scaled by the marginal omegas,
    then right-multiplied by C^-1 P.  For d = 1 this is the identity on
    the standardized data and alpha-star is |alpha|.
    """
    if params.is_skew_t:
        raise ValueError("canonical transformation applies to the skew-normal family")
    if data.d != params.d:
        raise ValueError(f"data dimension {data.d} != parameter dimension {params.d}")
    z = (data.rows - params.xi) / params.omega_diag
    if params.d == 1:
        if params.alpha[0] == 0.0:
            raise ValueError("canonical transformation is undefined for alpha = 0")
        return Dataset(rows=z), abs(float(params.alpha[0]))
    basis = canonical_matrix(params.omega_bar, params.alpha)
    return Dataset(rows=z @ basis.transform), basis.alpha_star
