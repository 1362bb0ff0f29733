"""Reference implementations that share no code with the package under test."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import sympy as sp
from scipy import integrate, special


def uw_draws(mu, lam, rho, count, seed):
    """Y = mu ** A with A Weibull(lam) scaled so that A**lam ~ Exp(rate=-log rho)."""
    rng = np.random.default_rng(seed)
    a = rng.weibull(lam, count) * (-math.log(rho)) ** (-1.0 / lam)
    return mu ** a


def uw_density(y, mu, lam, rho):
    """Density written directly from the formula, scalar, no shared helpers."""
    a = math.log(y) / math.log(mu)
    return lam / y * math.log(rho) / math.log(mu) * a ** (lam - 1.0) * rho ** (a ** lam)


def quad01(f, **kw):
    # split at a few interior points so peaked integrands are resolved
    pts = [0.0, 1e-6, 0.01, 0.1, 0.5, 0.9, 0.99, 1.0 - 1e-9, 1.0]
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        total += integrate.quad(f, a, b, limit=400, epsabs=1e-13, epsrel=1e-12, **kw)[0]
    return total


def lemma_by_quadrature(which, lam, rho):
    """E[g(A)] by integrating against the density of T = A**lam ~ Exp(c)."""
    c = -math.log(rho)
    g = {
        "L1": lambda t: t,
        "L2": lambda t: math.log(t) / lam,
        "L3": lambda t: t * math.log(t) / lam,
        "L4": lambda t: t * (math.log(t) / lam) ** 2,
    }[which]
    f = lambda t: g(t) * c * math.exp(-c * t)
    return (integrate.quad(f, 0.0, 1.0, limit=400, epsabs=1e-14, epsrel=1e-13)[0]
            + integrate.quad(f, 1.0, np.inf, limit=400, epsabs=1e-14, epsrel=1e-13)[0])


def lemma_by_mc(which, lam, rho, count=10**6, seed=0):
    """Sample mean and its standard error from Weibull draws of A."""
    rng = np.random.default_rng(seed)
    a = rng.weibull(lam, count) * (-math.log(rho)) ** (-1.0 / lam)
    v = {"L1": a ** lam, "L2": np.log(a), "L3": a ** lam * np.log(a),
         "L4": a ** lam * np.log(a) ** 2}[which]
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(count))


@lru_cache(maxsize=None)
def _symbolic():
    y, mu, lam, rho = sp.symbols("y mu lam rho", positive=True)
    A = sp.log(y) / sp.log(mu)
    ll = sp.log(lam) - sp.log(y) + sp.log(sp.log(rho) / sp.log(mu)) + (lam - 1) * sp.log(A) \
        + sp.log(rho) * A ** lam
    fns = {
        "dmu": sp.diff(ll, mu),
        "dlam": sp.diff(ll, lam),
        "dmu2": sp.diff(ll, mu, 2),
        "dmu_dlam": sp.diff(ll, mu, lam),
        "dlam2": sp.diff(ll, lam, 2),
    }
    return {k: sp.lambdify((y, mu, lam, rho), v, "numpy") for k, v in fns.items()}


def symbolic_derivatives(y, mu, lam, rho) -> dict:
    """Derivatives of the log density by computer algebra."""
    return {k: np.asarray(f(np.asarray(y, dtype=float), mu, lam, rho), dtype=float)
            for k, f in _symbolic().items()}


def link_ref(kind, mu):
    mu = float(mu)
    return {"logit": math.log(mu / (1 - mu)),
            "probit": float(special.ndtri(mu)),
            "cloglog": math.log(-math.log1p(-mu)),
            "loglog": -math.log(-math.log(mu))}[kind]


def linkinv_ref(kind, eta):
    eta = float(eta)
    return {"logit": float(special.expit(eta)),
            "probit": float(special.ndtr(eta)),
            "cloglog": -math.expm1(-math.exp(eta)),
            "loglog": math.exp(-math.exp(-eta))}[kind]


def filter_ref(kind, alpha, beta, phi, theta, y, X=None):
    """Plain loop over the recursion with zero pre-sample terms."""
    n = len(y)
    beta = list(beta)
    X = np.zeros((n, 0)) if X is None else np.asarray(X)
    xb = [sum(b * X[t, j] for j, b in enumerate(beta)) for t in range(n)]
    gy = [link_ref(kind, v) for v in y]
    eta, mu, r = [0.0] * n, [0.0] * n, [0.0] * n
    for t in range(n):
        e = alpha + xb[t]
        for i, ph in enumerate(phi, start=1):
            if t - i >= 0:
                e += ph * (gy[t - i] - xb[t - i])
        for j, th in enumerate(theta, start=1):
            if t - j >= 0:
                e += th * r[t - j]
        eta[t] = e
        mu[t] = min(max(linkinv_ref(kind, e), 1e-12), 1 - 1e-12)
        r[t] = gy[t] - link_ref(kind, mu[t])
    return np.array(eta), np.array(mu), np.array(r)


def loglik_ref(kind, alpha, beta, phi, theta, lam, rho, y, X=None):
    _, mu, _ = filter_ref(kind, alpha, beta, phi, theta, y, X)
    return sum(math.log(uw_density(yt, mt, lam, rho)) for yt, mt in zip(y, mu))


def central_gradient(f, x, rel_step=1e-5):
    """Central differences with a step scaled to each coordinate."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = rel_step * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def random_config(seed, n=500):
    """A random stationary (p, q <= 2, r <= 2) model with a simulated series."""
    from uwarma import ModelSpec, ParamVector, SeriesData, simulate

    rng = np.random.default_rng(seed)
    p, q, r = (int(v) for v in rng.integers(0, 3, size=3))
    link = ["logit", "probit", "loglog", "cloglog"][seed % 4]
    phi = rng.uniform(0.1, 0.4, p) * rng.choice([-1, 1], p)
    theta = rng.uniform(0.1, 0.4, q) * rng.choice([-1, 1], q)
    spec = ModelSpec(p=p, q=q, rho=float(rng.uniform(0.2, 0.8)), link=link, r=r)
    gamma = ParamVector(alpha=float(rng.uniform(-0.3, 0.3)), beta=rng.uniform(-0.5, 0.5, r),
                        phi=phi, theta=theta, lam=float(rng.uniform(3, 10)))
    X = rng.normal(size=(n, r)) if r else None
    sim = simulate(spec, gamma, n, burnin=0, seed=seed, X=X)
    data = SeriesData(sim.y, X)
    # evaluate away from the generating point so every score component is nonzero
    a = gamma.to_array()
    off = a + rng.normal(scale=0.05, size=a.size)
    off[-1] = a[-1] * 1.1
    return spec, ParamVector.from_array(spec, off), data
