"""UWARMA recursion: linear predictor, conditional quantiles and residuals.

    eta_t = alpha + x_t'beta + sum_i phi_i [g(y_{t-i}) - x_{t-i}'beta]
                              + sum_j theta_j r_{t-j},
    mu_t  = g^{-1}(eta_t),   r_t = g(y_t) - g(mu_t).

Terms indexed at or before time 0 contribute nothing. One compiled kernel
drives filtering, simulation and forecasting so the three agree bit for bit.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .links import EPS, LinkKind, link_eval, link_scalar, linkinv_raw


class InstabilityWarning(RuntimeWarning):
    """mu_t or y_t was pushed against the boundary of (0, 1)."""


class ArmaPolynomialWarning(UserWarning):
    """AR polynomial has a unit root or shares a root with the MA polynomial."""


class BoundaryCollapseError(FloatingPointError):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


@dataclass(frozen=True)
class ModelSpec:
    """Orders, fixed quantile level, link and covariate count.

    The intercept is always part of the model; ``rho`` is known, never
    estimated.
    """

    p: int = 0
    q: int = 0
    rho: float = 0.5
    link: LinkKind = LinkKind.LOGIT
    r: int = 0

    def __post_init__(self):
        object.__setattr__(self, "link", LinkKind.parse(self.link))
        for name in ("p", "q", "r"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a nonnegative integer, got {v}")
            object.__setattr__(self, name, int(v))
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")

    @property
    def dim(self) -> int:
        return self.r + self.p + self.q + 2

    def param_names(self) -> list[str]:
        return (["alpha"] + [f"beta{i + 1}" for i in range(self.r)]
                + [f"phi{i + 1}" for i in range(self.p)]
                + [f"theta{i + 1}" for i in range(self.q)] + ["lambda"])

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "rho": self.rho,
                "link": self.link.value, "r": self.r}


def _vec(x, n, name):
    a = np.atleast_1d(np.asarray(x if x is not None else [], dtype=float)).ravel()
    if a.size != n:
        raise ValueError(f"{name} has length {a.size}, expected {n}")
    return a


@dataclass(frozen=True)
class ParamVector:
    """gamma = (alpha, beta', phi', theta', lambda)'."""

    alpha: float
    beta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    phi: np.ndarray = field(default_factory=lambda: np.zeros(0))
    theta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    lam: float = 10.0

    def __post_init__(self):
        for name in ("beta", "phi", "theta"):
            v = np.atleast_1d(np.asarray(getattr(self, name), dtype=float)).ravel()
            object.__setattr__(self, name, v)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "lam", float(self.lam))
        if not self.lam > 0.0:
            raise ValueError(f"lambda must be positive, got {self.lam}")

    @property
    def dim(self) -> int:
        return self.beta.size + self.phi.size + self.theta.size + 2

    def check(self, spec: ModelSpec) -> "ParamVector":
        _vec(self.beta, spec.r, "beta")
        _vec(self.phi, spec.p, "phi")
        _vec(self.theta, spec.q, "theta")
        return self

    def to_array(self) -> np.ndarray:
        return np.concatenate([[self.alpha], self.beta, self.phi, self.theta, [self.lam]])

    @classmethod
    def from_array(cls, spec: ModelSpec, a) -> "ParamVector":
        a = np.asarray(a, dtype=float)
        if a.size != spec.dim:
            raise ValueError(f"parameter vector has length {a.size}, expected {spec.dim}")
        r, p, q = spec.r, spec.p, spec.q
        return cls(alpha=a[0], beta=a[1:1 + r], phi=a[1 + r:1 + r + p],
                   theta=a[1 + r + p:1 + r + p + q], lam=a[-1])

    def to_dict(self, spec: ModelSpec) -> dict:
        return dict(zip(spec.param_names(), map(float, self.to_array())))

    def __eq__(self, other):
        if not isinstance(other, ParamVector):
            return NotImplemented
        a, b = self.to_array(), other.to_array()
        return (self.beta.size, self.phi.size, self.theta.size) == (
            other.beta.size, other.phi.size, other.theta.size) and np.array_equal(a, b)


@dataclass(frozen=True)
class SeriesData:
    """Response in (0, 1) and its n x r covariate matrix."""

    y: np.ndarray
    X: np.ndarray | None = None

    def __post_init__(self):
        y = np.ascontiguousarray(np.asarray(self.y, dtype=float).ravel())
        if y.size == 0:
            raise ValueError("empty series")
        bad = np.flatnonzero(~((y > 0.0) & (y < 1.0)))
        if bad.size:
            raise ValueError(f"y must lie strictly inside (0, 1); first offending index {bad[0]}"
                             f" (value {y[bad[0]]})")
        X = self.X
        if X is None:
            X = np.zeros((y.size, 0))
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.shape[0] != y.size:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.size} entries")
        if not np.all(np.isfinite(X)):
            raise ValueError("covariate matrix contains non-finite values")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", np.ascontiguousarray(X))

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def r(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class SimulatedSeries(SeriesData):
    """A simulated series along with the generator's internal sequences."""

    mu: np.ndarray | None = None
    eta: np.ndarray | None = None
    clamp_events: int = 0


@dataclass(frozen=True)
class FilterOutput:
    eta: np.ndarray
    mu: np.ndarray
    resid: np.ndarray
    clamp_events: int = 0


@njit(cache=True)
def _xb(X, beta):
    n, r = X.shape
    out = np.zeros(n)
    for t in range(n):
        s = 0.0
        for l in range(r):
            s += X[t, l] * beta[l]
        out[t] = s
    return out


@njit(cache=True)
def _recursion(code, alpha, xb, phi, theta, gy, y, u, n_obs, log_rho, inv_lam, simulate):
    """Run the recursion over ``xb.size`` steps.

    Steps ``t < n_obs`` use observed ``gy`` (or draw ``y`` from ``u`` when
    ``simulate``); later steps are forecasts: ``y_t = mu_t`` and ``r_t = 0``.
    ``gy`` and ``y`` are filled in place for simulated and forecast steps.
    """
    n = xb.size
    eta = np.empty(n)
    mu = np.empty(n)
    r = np.empty(n)
    clamps = 0
    for t in range(n):
        e = alpha + xb[t]
        for i in range(phi.size):
            s = t - i - 1
            if s >= 0:
                e += phi[i] * (gy[s] - xb[s])
        for j in range(theta.size):
            s = t - j - 1
            if s >= 0:
                e += theta[j] * r[s]
        m = linkinv_raw(code, e)
        if m < EPS:
            m = EPS
            clamps += 1
        elif m > 1.0 - EPS:
            m = 1.0 - EPS
            clamps += 1
        eta[t] = e
        mu[t] = m
        gm = link_scalar(code, m)
        if t < n_obs:
            if simulate:
                yt = m ** ((math.log(u[t]) / log_rho) ** inv_lam)
                if yt < EPS:
                    yt = EPS
                    clamps += 1
                elif yt > 1.0 - EPS:
                    yt = 1.0 - EPS
                    clamps += 1
                y[t] = yt
                gy[t] = link_scalar(code, yt)
            r[t] = gy[t] - gm
        else:
            y[t] = m
            gy[t] = gm
            r[t] = 0.0
    return eta, mu, r, clamps


def _check_dims(spec: ModelSpec, gamma: ParamVector, r: int):
    gamma.check(spec)
    if r != spec.r:
        raise ValueError(f"data carry {r} covariates, model expects {spec.r}")


def filter_series(spec: ModelSpec, gamma: ParamVector, data: SeriesData) -> FilterOutput:
    """eta_t, mu_t and r_t for an observed series."""
    _check_dims(spec, gamma, data.r)
    gy = link_eval(spec.link, data.y)
    if not np.all(np.isfinite(gy)):
        t = int(np.flatnonzero(~np.isfinite(gy))[0])
        raise BoundaryCollapseError(f"g(y_t) is not finite at t={t + 1}", t + 1)
    xb = _xb(data.X, gamma.beta)
    eta, mu, r, clamps = _recursion(
        spec.link.code, gamma.alpha, xb, gamma.phi, gamma.theta, gy, data.y.copy(),
        np.empty(0), data.n, math.log(spec.rho), 1.0 / gamma.lam, False)
    return FilterOutput(eta=eta, mu=mu, resid=r, clamp_events=int(clamps))


def check_arma_polynomials(phi, theta, tol: float = 1e-8) -> list[str]:
    """Warn when the AR polynomial has a unit root or shares roots with the MA one.

    Returns the list of issues found (empty when none).
    """
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    issues = []
    # 1 - phi_1 z - ... and 1 + theta_1 z + ..., roots in z
    ar_roots = np.roots(np.r_[-phi[::-1], 1.0]) if phi.size and np.any(phi) else np.zeros(0)
    ma_roots = np.roots(np.r_[theta[::-1], 1.0]) if theta.size and np.any(theta) else np.zeros(0)
    if np.any(np.abs(np.abs(ar_roots) - 1.0) < tol):
        issues.append("AR polynomial has a unit root")
    for z in ar_roots:
        if ma_roots.size and np.min(np.abs(ma_roots - z)) < tol:
            issues.append(f"AR and MA polynomials share the root {z:.6g}")
            break
    for msg in issues:
        warnings.warn(msg, ArmaPolynomialWarning, stacklevel=2)
    return issues


def simulate(spec: ModelSpec, gamma: ParamVector, n: int, burnin: int = 1000, seed: int = 0,
             X=None, force: bool = False, on_collapse: str = "warn") -> SimulatedSeries:
    """Draw a UWARMA path of length ``n`` after discarding ``burnin`` steps.

    ``X`` must hold ``n + burnin`` rows when the model has covariates; rows
    ``burnin:`` become the returned covariate matrix. Shapes below 1 are
    refused unless ``force`` because the paths pile up at 0 and 1.
    ``on_collapse`` is ``"warn"``, ``"raise"`` or ``"ignore"``.
    """
    if n < 1 or burnin < 0:
        raise ValueError("need n >= 1 and burnin >= 0")
    total = n + burnin
    if X is None:
        if spec.r:
            raise ValueError(f"model has {spec.r} covariates: supply X with {total} rows")
        X = np.zeros((total, 0))
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != total:
        raise ValueError(f"X has {X.shape[0]} rows, expected n + burnin = {total}")
    _check_dims(spec, gamma, X.shape[1])
    if gamma.lam < 1.0 and not force:
        raise ValueError(
            f"lambda={gamma.lam} < 1: the density is bathtub shaped and simulated paths "
            "collapse onto 0 or 1; pass force=True to simulate anyway")
    check_arma_polynomials(gamma.phi, gamma.theta)

    u = np.random.default_rng(seed).random(total)
    u[u == 0.0] = np.nextafter(0.0, 1.0)
    X = np.ascontiguousarray(X)
    xb = _xb(X, gamma.beta)
    y = np.empty(total)
    gy = np.empty(total)
    eta, mu, _, clamps = _recursion(
        spec.link.code, gamma.alpha, xb, gamma.phi, gamma.theta, gy, y, u, total,
        math.log(spec.rho), 1.0 / gamma.lam, True)
    if clamps:
        msg = (f"{clamps} values of mu_t or y_t were clamped to within {EPS} of 0 or 1; "
               "the parameters drive the process to the boundary")
        if on_collapse == "raise":
            raise BoundaryCollapseError(msg)
        if on_collapse == "warn":
            warnings.warn(msg, InstabilityWarning, stacklevel=2)
    keep = slice(burnin, None)
    return SimulatedSeries(y=y[keep], X=X[keep], mu=mu[keep], eta=eta[keep],
                           clamp_events=int(clamps))
