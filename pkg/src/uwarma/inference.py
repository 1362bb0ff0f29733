"""Partial log-likelihood, analytic score and cumulative partial information.

Notation: ``nu = (alpha, beta, phi, theta)``, ``A_t = log(y_t)/log(mu_t)``.
The derivatives of eta_t with respect to nu obey linear recursions driven by
the MA polynomial, so they are computed with ``scipy.signal.lfilter``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .core import (BoundaryCollapseError, FilterOutput, ModelSpec, ParamVector, SeriesData,
                   filter_series)
from .links import link_deriv, link_eval
from .uw_dist import EULER_GAMMA, UWParams, lemma_expectation, log_a


@dataclass(frozen=True)
class ScoreOutput:
    loglik: float
    grad: np.ndarray
    eta_jacobian: np.ndarray
    filt: FilterOutput


@dataclass(frozen=True)
class InfoMatrix:
    """Cumulative partial information K_n, ordered like ``ParamVector.to_array``."""

    K: np.ndarray

    @property
    def nu_nu(self) -> np.ndarray:
        return self.K[:-1, :-1]

    @property
    def nu_lam(self) -> np.ndarray:
        return self.K[:-1, -1]

    @property
    def lam_lam(self) -> float:
        return float(self.K[-1, -1])

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.K)

    def condition_number(self) -> float:
        ev = self.eigenvalues()
        if ev[0] <= 0.0:
            return math.inf
        return float(ev[-1] / ev[0])

    def inverse(self) -> np.ndarray:
        """K_n^{-1}; raises ``np.linalg.LinAlgError`` unless positive definite."""
        c = np.linalg.cholesky(self.K)
        ci = np.linalg.inv(c)
        return ci.T @ ci


def _terms(spec: ModelSpec, gamma: ParamVector, data: SeriesData, filt: FilterOutput):
    mu = filt.mu
    log_mu = np.log(mu)
    la = log_a(data.y, mu)
    a_lam = np.exp(gamma.lam * la)
    return mu, log_mu, la, a_lam


def _loglik_terms(y, mu, log_mu, la, a_lam, lam, log_rho):
    return (math.log(lam) - np.log(y) + np.log(log_rho / log_mu)
            + (lam - 1.0) * la + log_rho * a_lam)


def _raise_if_nonfinite(lt):
    bad = np.flatnonzero(~np.isfinite(lt))
    if bad.size:
        t = int(bad[0]) + 1
        raise BoundaryCollapseError(f"log-likelihood contribution is not finite at t={t}", t)


def loglik_terms(spec: ModelSpec, gamma: ParamVector, data: SeriesData,
                 filt: FilterOutput | None = None) -> np.ndarray:
    """Per-observation contributions l_t."""
    if filt is None:
        filt = filter_series(spec, gamma, data)
    mu, log_mu, la, a_lam = _terms(spec, gamma, data, filt)
    return _loglik_terms(data.y, mu, log_mu, la, a_lam, gamma.lam, math.log(spec.rho))


def partial_loglik(spec: ModelSpec, gamma: ParamVector, data: SeriesData) -> float:
    lt = loglik_terms(spec, gamma, data)
    _raise_if_nonfinite(lt)
    return float(np.sum(lt))


def eta_gradients(spec: ModelSpec, gamma: ParamVector, data: SeriesData,
                  filt: FilterOutput | None = None) -> np.ndarray:
    """n x (r + p + q + 1) matrix of d eta_t / d nu_j, zero before t = 1."""
    gamma.check(spec)
    if filt is None:
        filt = filter_series(spec, gamma, data)
    n, r, p, q = data.n, spec.r, spec.p, spec.q
    X = data.X
    xb = X @ gamma.beta if r else np.zeros(n)
    drive = np.zeros((n, 1 + r + p + q))
    drive[:, 0] = 1.0
    if r:
        bx = X.copy()
        for i in range(p):
            bx[i + 1:] -= gamma.phi[i] * X[:n - i - 1]
        drive[:, 1:1 + r] = bx
    if p:
        resid_ar = link_eval(spec.link, data.y) - xb
        for k in range(p):
            drive[k + 1:, 1 + r + k] = resid_ar[:n - k - 1]
    for s in range(q):
        drive[s + 1:, 1 + r + p + s] = filt.resid[:n - s - 1]
    if q:
        drive = lfilter([1.0], np.r_[1.0, gamma.theta], drive, axis=0)
    return drive


def score(spec: ModelSpec, gamma: ParamVector, data: SeriesData) -> ScoreOutput:
    """Log-likelihood and its gradient U(gamma) = (D' T h1, 1' h2)."""
    filt = filter_series(spec, gamma, data)
    mu, log_mu, la, a_lam = _terms(spec, gamma, data, filt)
    log_rho = math.log(spec.rho)
    lam = gamma.lam
    lt = _loglik_terms(data.y, mu, log_mu, la, a_lam, lam, log_rho)
    _raise_if_nonfinite(lt)
    h1 = -lam * (1.0 + log_rho * a_lam) / (mu * log_mu)
    h2 = 1.0 / lam + (1.0 + a_lam * log_rho) * la
    jac = eta_gradients(spec, gamma, data, filt)
    grad = np.empty(spec.dim)
    grad[:-1] = jac.T @ (h1 / link_deriv(spec.link, mu))
    grad[-1] = h2.sum()
    return ScoreOutput(loglik=float(lt.sum()), grad=grad, eta_jacobian=jac, filt=filt)


def expected_info_terms(mu, lam: float, rho: float):
    """Per-observation ``(E_mu, e, k_lamlam)`` at quantile ``mu``.

    ``E_mu = -E[d2l/dmu2]``, ``e = -E[d2l/dmu dlam]``, ``k_lamlam = -E[d2l/dlam2]``.
    The last comes from ``d2l/dlam2 = log(rho) A^lam log(A)^2 - 1/lam^2`` and the
    closed form for ``E[A^lam log(A)^2]``.
    """
    mu = np.asarray(mu, dtype=float)
    log_mu = np.log(mu)
    log_rho = math.log(rho)
    e_mu = lam**2 / (mu**2 * log_mu**2)
    e = (EULER_GAMMA + math.log(-log_rho) - 1.0) / (mu * log_mu)
    l4 = lemma_expectation("L4", UWParams(0.5, lam, rho))
    k_ll = 1.0 / lam**2 - log_rho * l4
    return e_mu, e, k_ll


def info_matrix(spec: ModelSpec, gamma: ParamVector, data: SeriesData,
                score_out: ScoreOutput | None = None) -> InfoMatrix:
    if score_out is None:
        filt = filter_series(spec, gamma, data)
        jac = eta_gradients(spec, gamma, data, filt)
    else:
        filt, jac = score_out.filt, score_out.eta_jacobian
    mu = filt.mu
    tdiag = 1.0 / link_deriv(spec.link, mu)
    e_mu, e, k_ll = expected_info_terms(mu, gamma.lam, spec.rho)
    K = np.empty((spec.dim, spec.dim))
    K[:-1, :-1] = (jac * (tdiag**2 * e_mu)[:, None]).T @ jac
    K[:-1, -1] = K[-1, :-1] = jac.T @ (tdiag * e)
    K[-1, -1] = data.n * k_ll
    return InfoMatrix(K=K)


def observation_derivatives(y, mu, lam: float, rho: float) -> dict:
    """Exact first and second derivatives of l_t in (mu_t, lambda) for given y."""
    y = np.asarray(y, dtype=float)
    log_mu = math.log(mu)
    log_rho = math.log(rho)
    la = log_a(y, mu)
    a_lam = np.exp(lam * la)
    c = 1.0 + log_rho * a_lam
    denom = mu * log_mu
    return {
        "dmu": -lam * c / denom,
        "dlam": 1.0 / lam + c * la,
        "dmu2": (lam * (log_mu + 1.0) * c + lam**2 * log_rho * a_lam) / denom**2,
        "dmu_dlam": -(c + lam * log_rho * a_lam * la) / denom,
        "dlam2": log_rho * a_lam * la**2 - 1.0 / lam**2,
    }
