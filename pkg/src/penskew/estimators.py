"""Fitting: plain and penalized maximum likelihood, the one-parameter
modified-score estimator, and standard errors from the penalized
observed information.

Optimization runs in transformed coordinates (log scale, log nu, raw
shape) from a method-of-moments start: a quasi-Newton pass on central
finite-difference gradients, with a simplex fallback when it stalls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy import optimize, special
from scipy.linalg import solve_triangular

from .distributions import Dataset, DirectParams, alpha_star
from .likelihood import ModelSpec, _sn1_loglik, _st1_loglik, loglik, penalized_loglik
from .penalty import PenaltyCoeffs, q_value, sn_coeffs, st_coeffs
from .specfun import QuadratureRule, expect_t, t_logcdf, zeta1, zeta1_t

__all__ = [
    "FitOptions",
    "FitResult",
    "OptimizationError",
    "RootBracketError",
    "InformationMatrixError",
    "DivergedMLEError",
    "fit_mle",
    "fit_mple",
    "fit_sf_one_param",
    "st_m_exact",
    "sn_m_exact",
    "stderr_from_penalized_info",
    "resolve_penalty",
]

_BIG = 1e10


class OptimizationError(RuntimeError):
    pass


class DivergedMLEError(RuntimeError):
    pass


class InformationMatrixError(RuntimeError):
    pass


class RootBracketError(RuntimeError):
    def __init__(self, message, lo, hi):
        super().__init__(f"{message}; searched [{lo}, {hi}]")
        self.interval = (lo, hi)


@dataclass(frozen=True)
class FitOptions:
    divergence_threshold: float = 100.0
    gtol: float = 1e-6
    maxiter: int = 300
    grad_step: float = 1e-6
    hessian_step: float = 1e-4
    nu_bounds: tuple = (0.1, 1e6)
    trace: bool = False


@dataclass
class FitResult:
    """Outcome of one estimator on one dataset."""

    method: str
    estimates: DirectParams
    loglik_at_opt: float
    penalized_loglik_at_opt: float | None = None
    stderr: np.ndarray | None = None
    obs_info: np.ndarray | None = None
    diverged: bool = False
    converged: bool = True
    iterations: int = 0
    optimizer_trace: list | None = None
    penalty: PenaltyCoeffs | None = None
    diagnostics: object = None

    def __post_init__(self):
        if self.diverged and self.method != "MLE":
            raise ValueError(f"only the MLE may diverge, got method={self.method!r}")

    def to_json_dict(self) -> dict:
        est = self.estimates
        out = {
            "method": self.method,
            "estimates": {
                "xi": est.xi.tolist(),
                "omega_mat": est.omega_mat.tolist(),
                "alpha": est.alpha.tolist(),
                "nu": est.nu,
            },
            "loglik": self.loglik_at_opt,
            "penalized_loglik": self.penalized_loglik_at_opt,
            "stderr": None if self.stderr is None else np.asarray(self.stderr).tolist(),
            "diverged": self.diverged,
            "converged": self.converged,
            "iterations": self.iterations,
        }
        if est.d == 1:
            out["estimates"]["omega"] = est.omega
        if self.penalty is not None:
            out["penalty"] = {
                "c1": self.penalty.c1,
                "c2": self.penalty.c2,
                "provenance": self.penalty.provenance,
                "nu": self.penalty.nu,
            }
        return out


def resolve_penalty(spec: ModelSpec, nu: float | None = None, mode: str | None = None) -> PenaltyCoeffs:
    """Penalty coefficients a fit should use under ``spec``.

    Explicit spec.penalty wins.  Otherwise the skew-normal coefficients,
    or the skew-t ones at the pinned (or supplied) nu: quadrature-exact
    when nu is fixed, closed-form approximate when the optimizer is
    moving nu (override with ``mode``).
    """
    if spec.penalty is not None:
        return spec.penalty
    if spec.family == "sn":
        return sn_coeffs()
    pinned = spec.fixed.get("nu", nu)
    if pinned is None:
        raise ValueError("cannot resolve a skew-t penalty without nu")
    return st_coeffs(float(pinned), mode or ("exact" if "nu" in spec.fixed else "approx"))


# ---------------------------------------------------------------------------
# parameter packing


class _FreeMap:
    """Maps between free-parameter vectors and DirectParams.

    Optimizer coordinates use log omega (d = 1), a Cholesky factor with
    log diagonal (d > 1), and log nu; ``direct`` coordinates are
    (xi, omega | vech Omega, alpha, nu) for information matrices.
    """

    def __init__(self, spec: ModelSpec):
        self.spec = spec
        self.d = spec.dimension
        self.free_xi = "xi" not in spec.fixed
        self.free_scale = "omega" not in spec.fixed and "omega_mat" not in spec.fixed
        self.free_alpha = "alpha" not in spec.fixed
        self.free_nu = spec.family == "st" and "nu" not in spec.fixed
        d = self.d
        self._tril = np.tril_indices(d)
        names = []
        if self.free_xi:
            names += [f"xi_{j+1}" for j in range(d)] if d > 1 else ["xi"]
        if self.free_scale:
            if d == 1:
                names += ["omega"]
            else:
                names += [f"omega_{i+1}{j+1}" for i, j in zip(*self._tril)]
        if self.free_alpha:
            names += [f"alpha_{j+1}" for j in range(d)] if d > 1 else ["alpha"]
        if self.free_nu:
            names += ["nu"]
        self.direct_names = names
        self.n_free = len(names)

    def _fixed_xi(self):
        return np.broadcast_to(np.asarray(self.spec.fixed["xi"], dtype=float), (self.d,))

    def _fixed_omega_mat(self):
        if "omega" in self.spec.fixed:
            return np.array([[float(self.spec.fixed["omega"]) ** 2]])
        return np.asarray(self.spec.fixed["omega_mat"], dtype=float)

    def _fixed_alpha(self):
        return np.broadcast_to(np.asarray(self.spec.fixed["alpha"], dtype=float), (self.d,))

    def pack(self, params: DirectParams) -> np.ndarray:
        out = []
        if self.free_xi:
            out.extend(params.xi)
        if self.free_scale:
            if self.d == 1:
                out.append(math.log(params.omega))
            else:
                chol = np.linalg.cholesky(params.omega_mat)
                chol[np.diag_indices(self.d)] = np.log(np.diag(chol))
                out.extend(chol[self._tril])
        if self.free_alpha:
            out.extend(params.alpha)
        if self.free_nu:
            out.append(math.log(params.nu))
        return np.asarray(out, dtype=float)

    def unpack(self, x: np.ndarray) -> DirectParams:
        xi, omega_mat, alpha, nu = self._components(x)
        return DirectParams(xi=xi, omega_mat=omega_mat, alpha=alpha, nu=nu)

    def _components(self, x):
        pos = 0
        d = self.d
        if self.free_xi:
            xi = np.asarray(x[pos:pos + d], dtype=float)
            pos += d
        else:
            xi = self._fixed_xi()
        if self.free_scale:
            if d == 1:
                omega_mat = np.array([[math.exp(2.0 * x[pos])]])
                pos += 1
            else:
                k = len(self._tril[0])
                chol = np.zeros((d, d))
                chol[self._tril] = x[pos:pos + k]
                diag = np.exp(np.diag(chol).copy())
                chol[np.diag_indices(d)] = diag
                omega_mat = chol @ chol.T
                pos += k
        else:
            omega_mat = self._fixed_omega_mat()
        if self.free_alpha:
            alpha = np.asarray(x[pos:pos + d], dtype=float)
            pos += d
        else:
            alpha = self._fixed_alpha()
        nu = math.exp(x[pos]) if self.free_nu else self.spec.fixed.get("nu")
        return xi, omega_mat, alpha, (float(nu) if nu is not None else None)

    # direct coordinates (for observed-information matrices)

    def direct_pack(self, params: DirectParams) -> np.ndarray:
        out = []
        if self.free_xi:
            out.extend(params.xi)
        if self.free_scale:
            if self.d == 1:
                out.append(params.omega)
            else:
                out.extend(params.omega_mat[self._tril])
        if self.free_alpha:
            out.extend(params.alpha)
        if self.free_nu:
            out.append(params.nu)
        return np.asarray(out, dtype=float)

    def direct_unpack(self, x: np.ndarray) -> DirectParams:
        pos = 0
        d = self.d
        if self.free_xi:
            xi = np.asarray(x[pos:pos + d], dtype=float); pos += d
        else:
            xi = self._fixed_xi()
        if self.free_scale:
            if d == 1:
                omega_mat = np.array([[float(x[pos]) ** 2]]); pos += 1
            else:
                k = len(self._tril[0])
                omega_mat = np.zeros((d, d))
                omega_mat[self._tril] = x[pos:pos + k]
                omega_mat = omega_mat + np.tril(omega_mat, -1).T
                pos += k
        else:
            omega_mat = self._fixed_omega_mat()
        if self.free_alpha:
            alpha = np.asarray(x[pos:pos + d], dtype=float); pos += d
        else:
            alpha = self._fixed_alpha()
        nu = float(x[pos]) if self.free_nu else self.spec.fixed.get("nu")
        return DirectParams(xi=xi, omega_mat=omega_mat, alpha=alpha,
                            nu=(float(nu) if nu is not None else None))


# ---------------------------------------------------------------------------
# objectives and generic optimization


def _neg_loglik_factory(data: Dataset, spec: ModelSpec, fmap: _FreeMap,
                        penalty: Callable | None, opts: FitOptions) -> Callable:
    """Build the objective over free optimizer coordinates.

    ``penalty`` maps (alpha_star_sq, nu) to the penalty value, or None
    for the plain likelihood.  Invalid regions return a large value.
    """
    y = data.column(0) if spec.dimension == 1 else None
    rows = data.rows
    lo_lnu, hi_lnu = np.log(opts.nu_bounds[0]), np.log(opts.nu_bounds[1])

    def objective(x):
        try:
            xi, omega_mat, alpha, nu = fmap._components(x)
        except (OverflowError, ValueError):
            return _BIG
        if fmap.free_nu and not (lo_lnu <= math.log(nu) <= hi_lnu):
            return _BIG
        if spec.dimension == 1:
            omega = math.sqrt(omega_mat[0, 0])
            if not (1e-6 < omega < 1e6) or abs(alpha[0]) > 1e7:
                return _BIG
            if spec.family == "sn":
                ll = _sn1_loglik(y, xi[0], omega, alpha[0])
            else:
                ll = _st1_loglik(y, xi[0], omega, alpha[0], nu)
            a2 = alpha[0] * alpha[0]
        else:
            diag = np.diag(omega_mat)
            if not np.all(np.isfinite(diag)) or np.any(diag <= 1e-12) or np.any(diag > 1e12):
                return _BIG
            try:
                chol = np.linalg.cholesky(omega_mat)
            except np.linalg.LinAlgError:
                return _BIG
            v = rows - xi
            sol = solve_triangular(chol, v.T, lower=True)
            qx = np.sum(sol * sol, axis=0)
            logdet = 2.0 * np.sum(np.log(np.diag(chol)))
            omega_diag = np.sqrt(diag)
            u = (v / omega_diag) @ alpha
            if spec.family == "sn":
                ll = float(np.sum(-0.5 * spec.dimension * np.log(2 * np.pi) - 0.5 * logdet
                                  - 0.5 * qx + np.log(2.0) + special.log_ndtr(u)))
            else:
                dd = spec.dimension
                log_td = (special.gammaln((nu + dd) / 2.0) - special.gammaln(nu / 2.0)
                          - 0.5 * dd * np.log(nu * np.pi) - 0.5 * logdet
                          - 0.5 * (nu + dd) * np.log1p(qx / nu))
                ll = float(np.sum(np.log(2.0) + log_td
                                  + t_logcdf(u * np.sqrt((dd + nu) / (qx + nu)), nu + dd)))
            w = alpha / omega_diag
            a2 = float(w @ omega_mat @ w)
        if not np.isfinite(ll):
            return _BIG
        if penalty is not None:
            ll -= penalty(a2, nu)
        return -ll

    return objective


def _central_grad(f, x, step):
    g = np.empty(len(x))
    for i in range(len(x)):
        h = step * max(1.0, abs(x[i]))
        xp = x.copy(); xp[i] += h
        xm = x.copy(); xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2.0 * h)
    return g


def _minimize(objective, x0, opts: FitOptions):
    """Quasi-Newton pass on central-difference gradients, simplex fallback."""
    res = optimize.minimize(objective, x0, method="BFGS",
                            jac=lambda x: _central_grad(objective, x, opts.grad_step),
                            options=dict(maxiter=opts.maxiter, gtol=opts.gtol))
    nit = res.nit
    stages = [("bfgs", int(res.nit), float(res.fun))]
    if not res.success and res.status not in (0, 2):
        # status 2 is "precision loss", common and benign at flat optima
        nm = optimize.minimize(objective, x0, method="Nelder-Mead",
                               options=dict(maxiter=200 * len(x0), xatol=1e-8, fatol=1e-10))
        nit += nm.nit
        stages.append(("nelder-mead", int(nm.nit), float(nm.fun)))
        if nm.fun < res.fun:
            res2 = optimize.minimize(objective, nm.x, method="BFGS",
                                     jac=lambda x: _central_grad(objective, x, opts.grad_step),
                                     options=dict(maxiter=opts.maxiter, gtol=opts.gtol))
            nit += res2.nit
            stages.append(("bfgs", int(res2.nit), float(res2.fun)))
            res = res2 if res2.fun <= nm.fun else nm
    return res, nit, stages


def _mom_start(data: Dataset, spec: ModelSpec, fmap: _FreeMap) -> DirectParams:
    """Method-of-moments initial point honoring pinned components."""
    rows = data.rows
    d = spec.dimension
    m = rows.mean(axis=0)
    s = rows.std(axis=0)
    s[s == 0] = 1.0
    g1 = np.mean(((rows - m) / s) ** 3, axis=0)
    c = np.cbrt(2.0 * np.clip(g1, -0.9, 0.9) / (4.0 - np.pi))
    mz = c / np.sqrt(1.0 + c * c)
    delta = np.clip(mz * np.sqrt(np.pi / 2.0), -0.995, 0.995)
    omega = s / np.sqrt(np.maximum(1.0 - mz * mz, 1e-3))
    xi = m - omega * mz

    if "xi" in spec.fixed:
        xi = fmap._fixed_xi().copy()
    if not fmap.free_scale:
        omega_mat = fmap._fixed_omega_mat()
        omega = np.sqrt(np.diag(omega_mat))
    elif d == 1:
        omega_mat = np.array([[omega[0] ** 2]])
    else:
        corr = np.corrcoef(rows, rowvar=False)
        corr = 0.98 * corr + 0.02 * np.eye(d)  # keep comfortably positive definite
        omega_mat = corr * np.outer(omega, omega)

    if "alpha" in spec.fixed:
        alpha = fmap._fixed_alpha().copy()
    elif not fmap.free_xi and not fmap.free_scale:
        # shape-only model: moment-match on the standardized data
        z = (rows - xi) / omega
        g1z = np.mean(z**3, axis=0) / np.maximum(np.mean(z**2, axis=0), 1e-12) ** 1.5
        cz = np.cbrt(2.0 * np.clip(g1z, -0.9, 0.9) / (4.0 - np.pi))
        mzz = cz / np.sqrt(1.0 + cz * cz)
        dz = np.clip(mzz * np.sqrt(np.pi / 2.0), -0.995, 0.995)
        alpha = dz / np.sqrt(1.0 - dz * dz)
    elif d == 1:
        alpha = delta / np.sqrt(1.0 - delta * delta)
    else:
        omega_bar = omega_mat / np.outer(np.sqrt(np.diag(omega_mat)), np.sqrt(np.diag(omega_mat)))
        sol = np.linalg.solve(omega_bar, delta)
        quad = float(delta @ sol)
        if quad >= 0.98:
            sol *= np.sqrt(0.98 / quad)
            quad = 0.98
        alpha = sol / np.sqrt(1.0 - quad)

    nu = float(spec.fixed["nu"]) if "nu" in spec.fixed else (10.0 if spec.family == "st" else None)
    return DirectParams(xi=xi, omega_mat=omega_mat, alpha=alpha, nu=nu)


def _check_data(data: Dataset, spec: ModelSpec, fmap: _FreeMap):
    if data.d != spec.dimension:
        raise ValueError(f"data dimension {data.d} != model dimension {spec.dimension}")
    if fmap.free_scale:
        if np.any(np.ptp(data.rows, axis=0) == 0):
            raise ValueError("degenerate data: a column is constant, scale not identifiable")
        if data.n < spec.dimension + 2:
            raise ValueError(f"need at least d+2 = {spec.dimension + 2} observations, got {data.n}")


# ---------------------------------------------------------------------------
# one-parameter fast paths


def _one_param_negll(data: Dataset, spec: ModelSpec):
    y = data.column(0)
    xi = float(spec.fixed["xi"])
    omega = float(spec.fixed["omega"])
    if spec.family == "sn":
        return lambda a: -_sn1_loglik(y, xi, omega, a)
    nu = float(spec.fixed["nu"])
    return lambda a: -_st1_loglik(y, xi, omega, a, nu)


def _fit_one_param(data: Dataset, spec: ModelSpec, opts: FitOptions, penalized: bool):
    negll = _one_param_negll(data, spec)
    thr = opts.divergence_threshold
    xi = float(spec.fixed["xi"]); omega = float(spec.fixed["omega"])
    nu = spec.fixed.get("nu")
    if not penalized:
        # a one-sign sample maximizes the shape-only likelihood at infinity;
        # the sign test is exact where an optimizer could stall on the
        # float-flat plateau short of the threshold
        z = (data.column(0) - xi) / omega
        if np.all(z > 0) or np.all(z < 0):
            a_rep = math.copysign(thr, z[0])
            est = DirectParams.scalar(xi, omega, a_rep, nu)
            return FitResult(method="MLE", estimates=est, loglik_at_opt=-negll(a_rep),
                             diverged=True, converged=True, iterations=0)
    if penalized:
        coeffs = resolve_penalty(spec)
        objective = lambda a: negll(a) + q_value(coeffs, a * a)
    else:
        coeffs = None
        objective = negll
    res = optimize.minimize_scalar(objective, bounds=(-thr - 50.0, thr + 50.0),
                                   method="bounded", options=dict(xatol=1e-9))
    a_hat = float(res.x)
    nfev = int(res.nfev)
    if not penalized and abs(a_hat) > thr:
        a_rep = math.copysign(thr, a_hat)
        est = DirectParams.scalar(xi, omega, a_rep, nu)
        return FitResult(method="MLE", estimates=est, loglik_at_opt=-negll(a_rep),
                         diverged=True, converged=True, iterations=nfev)
    est = DirectParams.scalar(xi, omega, a_hat, nu)
    ll = -negll(a_hat)
    if penalized:
        return FitResult(method="MPLE", estimates=est, loglik_at_opt=ll,
                         penalized_loglik_at_opt=-float(res.fun), converged=True,
                         iterations=nfev, penalty=coeffs)
    return FitResult(method="MLE", estimates=est, loglik_at_opt=ll,
                     converged=True, iterations=nfev)


# ---------------------------------------------------------------------------
# public fits


def fit_mle(data: Dataset, spec: ModelSpec, opts: FitOptions | None = None) -> FitResult:
    """Maximum likelihood fit with divergence detection.

    A fit whose shape component exceeds the divergence threshold at
    convergence is flagged and reported clamped at the threshold (with
    the other free parameters re-maximized there), never at infinity.
    """
    opts = opts or FitOptions()
    fmap = _FreeMap(spec)
    _check_data(data, spec, fmap)
    if spec.is_one_param:
        return _fit_one_param(data, spec, opts, penalized=False)
    objective = _neg_loglik_factory(data, spec, fmap, None, opts)
    start = _mom_start(data, spec, fmap)
    res, nit, stages = _minimize(objective, fmap.pack(start), opts)
    params = fmap.unpack(res.x)
    thr = opts.divergence_threshold
    if fmap.free_alpha and np.max(np.abs(params.alpha)) > thr:
        clamped = params.alpha * (thr / np.max(np.abs(params.alpha)))
        pinned_spec = replace(spec, fixed={**spec.fixed, "alpha": clamped})
        pin_map = _FreeMap(pinned_spec)
        if pin_map.n_free:
            obj2 = _neg_loglik_factory(data, pinned_spec, pin_map, None, opts)
            res2, nit2, stages2 = _minimize(obj2, pin_map.pack(params), opts)
            params = pin_map.unpack(res2.x)
            ll = -float(res2.fun)
            nit += nit2
            stages += stages2
        else:
            ll = -float(objective(fmap.pack(replace_alpha(params, clamped))))
            params = replace_alpha(params, clamped)
        return FitResult(method="MLE", estimates=params, loglik_at_opt=ll,
                         diverged=True, converged=True, iterations=nit,
                         optimizer_trace=stages if opts.trace else None)
    if not np.isfinite(res.fun) or res.fun >= _BIG:
        raise OptimizationError("likelihood optimization failed to find a finite optimum")
    return FitResult(method="MLE", estimates=params, loglik_at_opt=-float(res.fun),
                     converged=bool(res.success or res.status == 2), iterations=nit,
                     optimizer_trace=stages if opts.trace else None)


def replace_alpha(params: DirectParams, alpha) -> DirectParams:
    return DirectParams(xi=params.xi, omega_mat=params.omega_mat,
                        alpha=np.asarray(alpha, dtype=float), nu=params.nu)


def fit_mple(data: Dataset, spec: ModelSpec, opts: FitOptions | None = None) -> FitResult:
    """Maximum penalized likelihood fit; always interior, never diverges."""
    opts = opts or FitOptions()
    fmap = _FreeMap(spec)
    _check_data(data, spec, fmap)
    if spec.is_one_param:
        return _fit_one_param(data, spec, opts, penalized=True)
    if spec.penalty is not None or spec.family == "sn" or "nu" in spec.fixed:
        coeffs = resolve_penalty(spec)
        penalty_fn = lambda a2, nu: q_value(coeffs, a2)
        final_coeffs = lambda params: coeffs
    else:
        # free nu: closed-form coefficients re-resolved at each candidate nu
        penalty_fn = lambda a2, nu: q_value(st_coeffs(nu, "approx"), a2)
        final_coeffs = lambda params: st_coeffs(params.nu, "approx")
    objective = _neg_loglik_factory(data, spec, fmap, penalty_fn, opts)
    start = _mom_start(data, spec, fmap)
    res, nit, stages = _minimize(objective, fmap.pack(start), opts)
    params = fmap.unpack(res.x)
    if fmap.free_alpha and np.max(np.abs(params.alpha)) > opts.divergence_threshold:
        # interior maximum is guaranteed; a runaway means a bad start
        null = replace_alpha(start, np.zeros(spec.dimension))
        res2, nit2, stages2 = _minimize(objective, fmap.pack(null), opts)
        nit += nit2
        stages += stages2
        if res2.fun <= res.fun:
            res, params = res2, fmap.unpack(res2.x)
    if not np.isfinite(res.fun) or res.fun >= _BIG:
        raise OptimizationError("penalized optimization failed to find a finite optimum")
    used = final_coeffs(params)
    pll = -float(res.fun)
    return FitResult(method="MPLE", estimates=params, loglik_at_opt=loglik(params, data, spec),
                     penalized_loglik_at_opt=pll, converged=bool(res.success or res.status == 2),
                     iterations=nit, penalty=used,
                     optimizer_trace=stages if opts.trace else None)


# ---------------------------------------------------------------------------
# modified-score estimator (one-parameter skew-normal)

_GH64 = QuadratureRule.gauss_hermite(64)


def sn_m_exact(alpha: float, rule: QuadratureRule = _GH64) -> float:
    """Score correction M(alpha) = -(alpha/2) a4/a2 for the scalar skew-normal.

    The moment ratio is computed from the standard-normal rewrite
    a_p(alpha) = sqrt(2/pi) (1+alpha^2)^(-(p+1)/2) E{X^p zeta1(delta X)},
    so a single Gauss-Hermite rule serves every alpha.
    """
    a = float(alpha)
    if a == 0.0:
        return 0.0
    delta = a / math.sqrt(1.0 + a * a)
    z = zeta1(delta * rule.nodes)
    e2 = float(np.dot(rule.weights, rule.nodes**2 * z))
    e4 = float(np.dot(rule.weights, rule.nodes**4 * z))
    return -a / (2.0 * (1.0 + a * a)) * e4 / e2


def fit_sf_one_param(data: Dataset, spec: ModelSpec | None = None,
                     opts: FitOptions | None = None) -> FitResult:
    """Root of the modified score l'(alpha) + M(alpha) = 0, one-parameter model.

    The root always exists and is finite; it is located by geometric
    bracket expansion followed by Brent's method.
    """
    opts = opts or FitOptions()
    if spec is None:
        spec = ModelSpec(family="sn", dimension=1, fixed={"xi": 0.0, "omega": 1.0})
    if not (spec.family == "sn" and spec.is_one_param):
        raise ValueError("the modified-score estimator is implemented for the "
                         "one-parameter skew-normal model")
    y = data.column(0)
    z = (y - float(spec.fixed["xi"])) / float(spec.fixed["omega"])

    def h(a):
        return float(np.sum(z * zeta1(a * z))) + sn_m_exact(a)

    h0 = h(0.0)
    if h0 == 0.0:
        root, nfev = 0.0, 1
    else:
        side = 1.0 if h0 > 0 else -1.0
        lo, hi, nfev = 0.0, side, 1
        while h(hi) * h0 > 0:
            lo, hi = hi, hi * 2.0
            nfev += 1
            if abs(hi) > 2.0**45:
                raise RootBracketError("modified score never changed sign", min(0, hi), max(0, hi))
        a, b = (lo, hi) if lo < hi else (hi, lo)
        root = float(optimize.brentq(h, a, b, xtol=1e-10))
    est = DirectParams.scalar(float(spec.fixed["xi"]), float(spec.fixed["omega"]), root)
    return FitResult(method="SF", estimates=est, loglik_at_opt=loglik(est, data, spec),
                     converged=True, iterations=nfev)


def st_m_exact(alpha: float, nu: float, tol: float = 1e-7) -> float:
    """Score correction M(alpha) for the shape-only skew-t model.

    Evaluates the two change-of-variable expectations over t(nu+1) and
    t(nu+3); odd in alpha with M(alpha) * alpha < 0, and -alpha/(2 M)
    close to e1nu + e2nu alpha^2.
    """
    a = float(alpha)
    nu = float(nu)
    if nu <= 0:
        raise ValueError(f"nu must be positive, got {nu!r}")
    if a == 0.0:
        return 0.0
    delta = a / math.sqrt(1.0 + a * a)
    one_minus_d2 = 1.0 / (1.0 + a * a)

    def integrand1(x):
        v = np.sqrt((nu + 1.0) / (nu + 1.0 + one_minus_d2 * x * x))
        return x * x * v * zeta1_t(delta * x * v, nu + 1.0)

    def integrand3(x):
        v = np.sqrt((nu + 1.0) / (nu + 3.0 + one_minus_d2 * x * x))
        return x**4 * v * zeta1_t(delta * x * v, nu + 1.0)

    e1 = expect_t(integrand1, nu + 1.0, tol=tol)
    e3 = expect_t(integrand3, nu + 3.0, tol=tol)
    ratio = math.sqrt((nu + 1.0) / (nu + 3.0)) * ((nu + 1.0) / (nu + 2.0)) ** 2 \
        * ((nu + 1.0) / (nu + 3.0))
    return -a / (2.0 * (1.0 + a * a)) * ratio * e3 / e1


# ---------------------------------------------------------------------------
# standard errors


def stderr_from_penalized_info(fit: FitResult, data: Dataset, spec: ModelSpec,
                               opts: FitOptions | None = None) -> np.ndarray:
    """Standard errors from the penalized observed information at the optimum.

    The Hessian of the penalized log-likelihood is differenced centrally
    in the direct parameterization; its negative must be positive
    definite, otherwise :class:`InformationMatrixError` is raised (no
    silent regularization).  The result is also attached to ``fit``.
    """
    opts = opts or FitOptions()
    if fit.diverged:
        raise DivergedMLEError("standard errors are undefined for a diverged fit")
    if not fit.converged:
        raise OptimizationError("fit did not converge; refusing to compute standard errors")
    coeffs = fit.penalty or resolve_penalty(spec, nu=fit.estimates.nu)
    fmap = _FreeMap(spec)

    def pll(xd):
        try:
            params = fmap.direct_unpack(xd)
        except ValueError:
            return -_BIG
        return loglik(params, data, spec) - q_value(coeffs, alpha_star(params) ** 2)

    x0 = fmap.direct_pack(fit.estimates)
    k = len(x0)
    h = opts.hessian_step * np.maximum(1.0, np.abs(x0))
    hess = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            xpp = x0.copy(); xpp[i] += h[i]; xpp[j] += h[j]
            xpm = x0.copy(); xpm[i] += h[i]; xpm[j] -= h[j]
            xmp = x0.copy(); xmp[i] -= h[i]; xmp[j] += h[j]
            xmm = x0.copy(); xmm[i] -= h[i]; xmm[j] -= h[j]
            hess[i, j] = hess[j, i] = (pll(xpp) - pll(xpm) - pll(xmp) + pll(xmm)) / (4 * h[i] * h[j])
    obs_info = -hess
    try:
        chol = np.linalg.cholesky(obs_info)
    except np.linalg.LinAlgError as exc:
        raise InformationMatrixError(
            f"penalized observed information is not positive definite "
            f"(free parameters: {fmap.direct_names})") from exc
    inv = np.linalg.inv(obs_info)
    se = np.sqrt(np.diag(inv))
    fit.stderr = se
    fit.obs_info = obs_info
    return se
