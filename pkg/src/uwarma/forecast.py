"""In-sample fitted quantiles, h-step forecasts and MAPE."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ModelSpec, ParamVector, SeriesData, _recursion, _xb
from .links import link_eval


@dataclass(frozen=True)
class ForecastResult:
    horizon: int
    yhat: np.ndarray
    mu_insample: np.ndarray


def forecast_ahead(spec: ModelSpec, gamma: ParamVector, data: SeriesData, h: int,
                   X_future=None) -> ForecastResult:
    """Fitted quantiles for t = 1..n and forecasts for n+1..n+h.

    Past the sample, unobserved g(y) are replaced by g of their forecasts and
    the residuals are zero.
    """
    if h < 1:
        raise ValueError("horizon must be a positive integer")
    gamma.check(spec)
    if data.r != spec.r:
        raise ValueError(f"data carry {data.r} covariates, model expects {spec.r}")
    if spec.r:
        if X_future is None:
            raise ValueError(f"the model has {spec.r} covariates: forecasting {h} steps ahead "
                             f"requires their future values (an {h} x {spec.r} matrix)")
        X_future = np.asarray(X_future, dtype=float).reshape(-1, spec.r)
        if X_future.shape[0] < h:
            raise ValueError(f"future covariates cover {X_future.shape[0]} steps, need {h}")
        X_future = X_future[:h]
    else:
        X_future = np.zeros((h, 0))
    n = data.n
    X = np.ascontiguousarray(np.vstack([data.X, X_future]))
    gy = np.empty(n + h)
    gy[:n] = link_eval(spec.link, data.y)
    y = np.empty(n + h)
    y[:n] = data.y
    _, mu, _, _ = _recursion(spec.link.code, gamma.alpha, _xb(X, gamma.beta), gamma.phi,
                             gamma.theta, gy, y, np.empty(0), n, math.log(spec.rho),
                             1.0 / gamma.lam, False)
    return ForecastResult(horizon=h, yhat=mu[n:].copy(), mu_insample=mu[:n].copy())


def mape(actual, predicted) -> float:
    """Mean of |a - p| / a, in unitary value."""
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if a.shape != p.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {p.shape}")
    if np.any(a == 0.0):
        raise ValueError("actual values must be nonzero")
    return float(np.mean(np.abs(a - p) / a))


def ape(actual, predicted) -> np.ndarray:
    """Elementwise absolute percentage errors."""
    a = np.asarray(actual, dtype=float)
    return np.abs(a - np.asarray(predicted, dtype=float)) / a


def mape_by_horizon(actual, predicted, horizons) -> dict:
    """MAPE of the first ``h`` forecasts of a path, for each ``h`` in ``horizons``."""
    err = ape(actual, predicted)
    if max(horizons) > err.size:
        raise ValueError(f"need {max(horizons)} forecasts, got {err.size}")
    return {h: float(err[:h].mean()) for h in horizons}
