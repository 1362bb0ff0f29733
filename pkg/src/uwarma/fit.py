"""Partial maximum likelihood fitting and the inference built on it."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .core import BoundaryCollapseError, ModelSpec, ParamVector, SeriesData
from .inference import InfoMatrix, info_matrix, score
from .links import link_eval, norm_ppf, norm_sf

log = logging.getLogger(__name__)

FLAT_CONDITION = 1e8


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class FitOptions:
    maxiter: int = 1000
    gtol: float = 1e-6
    ftol: float = 1e-10
    polish_steps: int = 10
    verbose: bool = False


@dataclass
class FitResult:
    spec: ModelSpec
    gamma_hat: ParamVector
    loglik: float
    info: InfoMatrix
    se: np.ndarray
    converged: bool
    iterations: int
    clamp_events: int
    n: int
    grad: np.ndarray
    message: str = ""
    init: ParamVector | None = None
    history: list = field(default_factory=list)
    covariate_names: list = field(default_factory=list)

    @property
    def names(self) -> list[str]:
        names = self.spec.param_names()
        for i, c in enumerate(self.covariate_names):
            names[1 + i] = f"beta[{c}]"
        return names

    @property
    def condition_number(self) -> float:
        return self.info.condition_number()

    @property
    def flat_likelihood(self) -> bool:
        return not self.condition_number < FLAT_CONDITION

    def conf_int(self, level: float = 0.95) -> np.ndarray:
        return standard_errors_ci(self, level)

    def wald(self, j: int, null: float = 0.0) -> tuple[float, float]:
        return wald_z(self, j, null)

    def criteria(self) -> tuple[float, float, float]:
        return info_criteria(self)

    def summary(self, level: float = 0.95) -> str:
        """Coefficient table with Wald statistics and information criteria."""
        est = self.gamma_hat.to_array()
        ci = self.conf_int(level)
        pct = f"{100 * level:g}%"
        sp = self.spec
        head = f"UWARMA({sp.p},{sp.q}) rho={sp.rho:g} link={sp.link.value}"
        lines = [f"{head}  n={self.n}  loglik={self.loglik:.4f}"
                 + ("" if self.converged else "  (NOT CONVERGED)"),
                 f"{'':>16s} {'estimate':>10s} {'se':>9s} {'z':>8s} {'p':>7s}   {pct} CI"]
        for j, name in enumerate(self.names):
            if j == est.size - 1:
                z_txt, p_txt = f"{'':>8s}", f"{'':>7s}"
            else:
                z, p = self.wald(j)
                z_txt, p_txt = f"{z:8.3f}", f"{p:7.4f}"
            lines.append(f"{name:>16s} {est[j]:10.5f} {self.se[j]:9.5f} {z_txt} {p_txt}"
                         f"   [{ci[j, 1]:.5f}, {ci[j, 2]:.5f}]")
        aic, bic, hqc = self.criteria()
        lines.append(f"AIC {aic:.3f}  BIC {bic:.3f}  HQC {hqc:.3f}")
        return "\n".join(lines)


def init_params(spec: ModelSpec, data: SeriesData) -> ParamVector:
    """OLS of g(y_t) on (1, x_t, g(y_{t-1}), ..., g(y_{t-p})) with theta = 0, lambda = 10."""
    n, p, r = data.n, spec.p, spec.r
    if n <= p + r + 1:
        raise ValueError(f"need more than p + r + 1 = {p + r + 1} observations, got {n}")
    gy = link_eval(spec.link, data.y)
    rows = np.arange(p, n)
    cols = [np.ones(rows.size)]
    cols += [data.X[rows, l] for l in range(r)]
    cols += [gy[rows - i - 1] for i in range(p)]
    Z = np.column_stack(cols)
    coef, _, rank, _ = np.linalg.lstsq(Z, gy[rows], rcond=None)
    if rank < Z.shape[1]:
        warnings.warn("initial OLS design is rank deficient; using the minimum-norm solution",
                      RuntimeWarning, stacklevel=2)
    return ParamVector(alpha=coef[0], beta=coef[1:1 + r], phi=coef[1 + r:],
                       theta=np.zeros(spec.q), lam=10.0)


def _to_z(gamma: ParamVector) -> np.ndarray:
    z = gamma.to_array()
    z[-1] = math.log(z[-1])
    return z


def _from_z(spec: ModelSpec, z) -> ParamVector:
    a = np.array(z, dtype=float)
    a[-1] = math.exp(a[-1])
    return ParamVector.from_array(spec, a)


class _Objective:
    """-loglik and its gradient in (nu, log lambda), with a one-entry cache."""

    def __init__(self, spec, data):
        self.spec, self.data = spec, data
        self.evals = 0
        self._key = None
        self._val = None

    def __call__(self, z):
        key = z.tobytes()
        if key != self._key:
            self.evals += 1
            try:
                lam = math.exp(z[-1])
                if not math.isfinite(lam) or lam == 0.0:
                    raise BoundaryCollapseError("lambda left (0, inf)")
                out = score(self.spec, _from_z(self.spec, z), self.data)
                g = -out.grad
                g[-1] *= lam
                self._val = (-out.loglik, g)
            except (BoundaryCollapseError, FloatingPointError, ValueError, OverflowError):
                self._val = (math.inf, np.full(z.size, np.nan))
            if not np.all(np.isfinite(self._val[1])):
                self._val = (math.inf, np.zeros(z.size))
            self._key = key
        return self._val

    def f(self, z):
        return self(z)[0]


def _hessian(obj, z):
    """Central-difference Jacobian of the analytic gradient."""
    k = z.size
    H = np.empty((k, k))
    for j in range(k):
        h = 1e-6 * max(1.0, abs(z[j]))
        e = np.zeros(k)
        e[j] = h
        H[:, j] = (obj(z + e)[1] - obj(z - e)[1]) / (2.0 * h)
    return 0.5 * (H + H.T)


def _polish(obj, z, f, steps, gtol, history):
    """Newton steps with a finite-difference Hessian; accepted only if f does not rise."""
    for _ in range(steps):
        g = obj(z)[1]
        if np.max(np.abs(g)) < 1e-3 * gtol:
            break
        H = _hessian(obj, z)
        try:
            np.linalg.cholesky(H)
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            break
        z_new = z - step
        f_new = obj.f(z_new)
        if not f_new <= f:
            break
        z, f = z_new, f_new
        history.append(-f)
    return z, f


def fit_pmle(spec: ModelSpec, data: SeriesData, options: FitOptions | None = None,
             init: ParamVector | None = None, covariate_names=None) -> FitResult:
    """Maximize the partial log-likelihood.

    L-BFGS-B on ``(nu, log lambda)`` with the analytic score, stopping when
    the projected gradient max-norm drops below ``gtol`` or the relative
    change of the objective below ``ftol``; a few Newton steps then tighten
    the first-order condition. A Nelder-Mead restart covers line-search
    breakdowns.
    """
    options = options or FitOptions()
    if data.r != spec.r:
        raise ValueError(f"data carry {data.r} covariates, model expects {spec.r}")
    if data.n < 10 * spec.dim:
        warnings.warn(f"only {data.n} observations for {spec.dim} parameters",
                      RuntimeWarning, stacklevel=2)
    if init is None:
        init = init_params(spec, data)
    init.check(spec)
    obj = _Objective(spec, data)
    z0 = _to_z(init)
    f0 = obj.f(z0)
    if not math.isfinite(f0):
        raise BoundaryCollapseError("log-likelihood is not finite at the starting values")
    history = [-f0]

    def callback(intermediate_result):
        history.append(-float(intermediate_result.fun))

    lbfgs_opts = {"maxiter": options.maxiter, "gtol": options.gtol, "ftol": options.ftol,
                  "maxcor": 20}
    res = minimize(obj, z0, jac=True, method="L-BFGS-B", options=lbfgs_opts, callback=callback)
    z, f, iterations = res.x, res.fun, res.nit
    message = str(res.message)
    ok = bool(res.success) and math.isfinite(f)
    if not ok:
        log.info("L-BFGS-B stopped (%s); restarting with Nelder-Mead", message)
        nm = minimize(obj.f, z, method="Nelder-Mead",
                      options={"maxiter": min(200 * z.size, 10 * options.maxiter),
                               "xatol": 1e-8, "fatol": 1e-10})
        if nm.fun <= f:
            z, f = nm.x, nm.fun
            history.append(-f)
        iterations += nm.nit
        res = minimize(obj, z, jac=True, method="L-BFGS-B", options=lbfgs_opts,
                       callback=callback)
        if res.fun <= f:
            z, f = res.x, res.fun
        iterations += res.nit
        message = str(res.message)
        ok = bool(res.success) and math.isfinite(f)
    z, f = _polish(obj, z, f, options.polish_steps, options.gtol, history)

    gamma = _from_z(spec, z)
    out = score(spec, gamma, data)
    info = info_matrix(spec, gamma, data, out)
    ok = ok or float(np.max(np.abs(out.grad))) < options.gtol
    if not ok:
        warnings.warn(f"optimizer did not converge: {message}", ConvergenceWarning,
                      stacklevel=2)
    se = _standard_errors(info)
    if covariate_names is None:
        covariate_names = [f"x{i + 1}" for i in range(spec.r)]
    fit = FitResult(spec=spec, gamma_hat=gamma, loglik=out.loglik, info=info, se=se,
                    converged=ok, iterations=int(iterations),
                    clamp_events=out.filt.clamp_events, n=data.n, grad=out.grad,
                    message=message, init=init, history=history,
                    covariate_names=list(covariate_names))
    if options.verbose:
        log.info("fit %s: loglik=%.6f converged=%s iterations=%d", spec, fit.loglik,
                 fit.converged, fit.iterations)
    if fit.flat_likelihood:
        warnings.warn(f"information matrix condition number {fit.condition_number:.3g} exceeds "
                      f"{FLAT_CONDITION:g}: the likelihood is nearly flat", RuntimeWarning,
                      stacklevel=2)
    return fit


def _standard_errors(info: InfoMatrix) -> np.ndarray:
    try:
        return np.sqrt(np.diag(info.inverse()))
    except np.linalg.LinAlgError:
        ev = info.eigenvalues()
        warnings.warn(f"information matrix is not positive definite (smallest eigenvalue "
                      f"{ev[0]:.3g}); standard errors set to NaN", RuntimeWarning, stacklevel=3)
        return np.full(info.K.shape[0], np.nan)


def standard_errors_ci(fit: FitResult, level: float = 0.95) -> np.ndarray:
    """Rows ``(se, lo, hi)`` per parameter for a ``level`` Wald interval."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    z = norm_ppf(0.5 + level / 2.0)
    est = fit.gamma_hat.to_array()
    return np.column_stack([fit.se, est - z * fit.se, est + z * fit.se])


def wald_z(fit: FitResult, j: int, null: float = 0.0) -> tuple[float, float]:
    """Two-sided Wald z test of ``gamma_j == null``; NaN when se is unavailable."""
    se = fit.se[j]
    if not (math.isfinite(se) and se > 0.0):
        return math.nan, math.nan
    z = (fit.gamma_hat.to_array()[j] - null) / se
    return float(z), min(1.0, 2.0 * norm_sf(abs(z)))


def information_criteria(loglik: float, k: int, n: float) -> tuple[float, float, float]:
    """(AIC, BIC, HQC) from a maximized log-likelihood with ``k`` parameters."""
    return (-2.0 * loglik + 2.0 * k,
            -2.0 * loglik + k * math.log(n),
            -2.0 * loglik + 2.0 * k * math.log(math.log(n)))


def info_criteria(fit: FitResult, n: int | None = None) -> tuple[float, float, float]:
    return information_criteria(fit.loglik, fit.spec.dim, fit.n if n is None else n)


@dataclass(frozen=True)
class Removal:
    name: str
    column: int
    p_value: float


def _drop_beta(gamma: ParamVector, l: int) -> ParamVector:
    return replace(gamma, beta=np.delete(gamma.beta, l))


def backward_eliminate(spec: ModelSpec, data: SeriesData, p_threshold: float = 0.05,
                       options: FitOptions | None = None, covariate_names=None):
    """Drop covariates one at a time by largest Wald p-value above ``p_threshold``.

    Only beta entries are candidates; alpha, phi, theta and lambda stay. A
    covariate whose p-value is undefined (singular information) counts as
    p = 1. Returns ``(final_fit, removals)``; ``final_fit.covariate_names``
    lists the survivors.
    """
    names = list(covariate_names or [f"x{i + 1}" for i in range(spec.r)])
    if len(names) != spec.r:
        raise ValueError("covariate_names must match the number of covariates")
    cols = list(range(spec.r))
    trace: list[Removal] = []
    fit = fit_pmle(spec, data, options, covariate_names=names)
    for _ in range(spec.r):
        if not cols:
            break
        pvals = []
        for l in range(len(cols)):
            pv = wald_z(fit, 1 + l)[1]
            pvals.append(1.0 if math.isnan(pv) else pv)
        worst = int(np.argmax(pvals))
        if pvals[worst] <= p_threshold:
            break
        trace.append(Removal(name=names[worst], column=cols[worst], p_value=pvals[worst]))
        log.info("removing %s (p=%.4f)", names[worst], pvals[worst])
        del cols[worst], names[worst]
        cur_spec = replace(spec, r=len(cols))
        cur_data = SeriesData(y=data.y, X=data.X[:, cols])
        fit = fit_pmle(cur_spec, cur_data, options, init=_drop_beta(fit.gamma_hat, worst),
                       covariate_names=names)
    return fit, trace
