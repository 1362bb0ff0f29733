"""Unit-Weibull distribution parameterized by its rho-th quantile.

If ``Y ~ UW(mu, lam; rho)`` then ``P(Y <= mu) = rho`` and, writing
``A = log(y) / log(mu)``, the density on (0, 1) is

    f(y) = lam / y * log(rho) / log(mu) * A**(lam - 1) * rho**(A**lam)

with cdf ``rho**(A**lam)``. ``A**lam`` is exponential with rate ``-log(rho)``,
which is what makes the closed-form expectations below available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EULER_GAMMA = 0.57721566490153286061

# floor for A = log(y)/log(mu) before taking logs
A_FLOOR = 1e-300


class DomainError(ValueError):
    """Argument outside the support of a distribution or link."""


@dataclass(frozen=True)
class UWParams:
    """One Unit-Weibull law: quantile ``mu`` at level ``rho``, shape ``lam``."""

    mu: float
    lam: float
    rho: float

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise ValueError(f"mu must lie in (0, 1), got {self.mu}")
        if not self.lam > 0.0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")


def _open_unit(x, name):
    x = np.asarray(x, dtype=float)
    if np.any(~((x > 0.0) & (x < 1.0))):
        raise DomainError(f"{name} must lie strictly inside (0, 1)")
    return x


def _scalar_or_array(out, like):
    return float(out) if np.ndim(like) == 0 else out


def log_a(y, mu):
    """``log(log(y) / log(mu))`` with the ratio floored at ``A_FLOOR``."""
    a = np.log(y) / np.log(mu)
    return np.log(np.maximum(a, A_FLOOR))


def log_pdf(y, p: UWParams):
    """Log density at ``y``; vectorized over ``y``."""
    y_arr = _open_unit(y, "y")
    la = log_a(y_arr, p.mu)
    log_rho = math.log(p.rho)
    out = (
        math.log(p.lam)
        - np.log(y_arr)
        + math.log(log_rho / math.log(p.mu))
        + (p.lam - 1.0) * la
        + log_rho * np.exp(p.lam * la)
    )
    return _scalar_or_array(out, y)


def pdf(y, p: UWParams):
    return np.exp(log_pdf(y, p))


def cdf(y, p: UWParams):
    """``rho ** (A ** lam)``."""
    y_arr = _open_unit(y, "y")
    out = np.power(p.rho, np.exp(p.lam * log_a(y_arr, p.mu)))
    return _scalar_or_array(out, y)


def quantile(u, p: UWParams):
    """Inverse cdf: ``mu ** ((log(u) / log(rho)) ** (1 / lam))``.

    Written as a power of ``mu`` so that ``quantile(rho) == mu`` holds exactly.
    """
    u_arr = _open_unit(u, "u")
    out = np.power(p.mu, (np.log(u_arr) / math.log(p.rho)) ** (1.0 / p.lam))
    return _scalar_or_array(out, u)


def sample(p: UWParams, count: int, seed: int) -> np.ndarray:
    """``count`` i.i.d. draws by inverse transform, deterministic in ``seed``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    u = np.random.default_rng(seed).random(count)
    # random() lives on [0, 1); 0 has probability 2**-53 but would map to y = 0
    u[u == 0.0] = np.nextafter(0.0, 1.0)
    y = quantile(u, p)
    return np.clip(y, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))


def lemma_expectation(which: str, p: UWParams) -> float:
    """Closed-form expectations of functions of ``A = log(Y)/log(mu)``.

    ``L1``: E[A**lam], ``L2``: E[log A], ``L3``: E[A**lam log A],
    ``L4``: E[A**lam (log A)**2]. None depend on ``mu``.

    All follow from ``A**lam ~ Exponential(rate=-log(rho))`` together with
    E[log W] = -kappa, E[W log W] = 1 - kappa and
    E[W log(W)**2] = pi**2/6 - 2 kappa + kappa**2 for W ~ Exponential(1).
    """
    k = EULER_GAMMA
    lr = math.log(p.rho)
    ll = math.log(-lr)
    lam = p.lam
    if which == "L1":
        return -1.0 / lr
    if which == "L2":
        return -(k + ll) / lam
    if which == "L3":
        return (k + ll - 1.0) / (lam * lr)
    if which == "L4":
        return -(math.pi**2 + 6.0 * (k - 2.0) * k + 6.0 * ll * (ll + 2.0 * k - 2.0)) / (
            6.0 * lam**2 * lr
        )
    raise ValueError(f"unknown expectation selector {which!r}; use L1, L2, L3 or L4")
