"""Rolling-window out-of-sample evaluation with optional covariate selection."""

from __future__ import annotations

import logging
import re
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .core import ModelSpec, SeriesData
from .fit import FitOptions, backward_eliminate, fit_pmle
from .forecast import ape, forecast_ahead

log = logging.getLogger(__name__)

_LAG = re.compile(r"_lag\d+$")


@dataclass(frozen=True)
class RollingConfig:
    window: int = 287
    h: int = 6
    step: int = 1
    select: bool = True
    pmax: float = 0.05
    jobs: int = 1


@dataclass
class RollingResult:
    label: str
    covariate_names: tuple
    starts: np.ndarray
    ape: np.ndarray          # windows x h
    kept: list               # retained covariate names per window
    converged: np.ndarray
    errors: dict

    @property
    def average_mape(self) -> np.ndarray:
        """Mean APE at steps t+1..t+h over windows that produced forecasts."""
        ok = np.all(np.isfinite(self.ape), axis=1)
        return self.ape[ok].mean(axis=0)

    def selection_frequency(self) -> dict:
        """Per base variable, share of windows retaining at least one of its lags."""
        bases = list(dict.fromkeys(_LAG.sub("", c) for c in self.covariate_names))
        done = [k for k in self.kept if k is not None]
        if not done:
            return {b: float("nan") for b in bases}
        return {b: float(np.mean([any(_LAG.sub("", c) == b for c in k) for k in done]))
                for b in bases}

    @property
    def mean_covariates(self) -> float:
        done = [len(k) for k in self.kept if k is not None]
        return float(np.mean(done)) if done else float("nan")


def window_starts(n: int, cfg: RollingConfig) -> np.ndarray:
    last = n - cfg.window - cfg.h
    if last < 0:
        raise ValueError(f"{n} observations cannot hold a window of {cfg.window} "
                         f"plus {cfg.h} test points")
    return np.arange(0, last + 1, cfg.step)


def _one_window(args):
    spec, y, X, names, s, cfg, options = args
    W, h = cfg.window, cfg.h
    train = SeriesData(y=y[s:s + W], X=X[s:s + W])
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            if cfg.select and spec.r:
                fit, trace = backward_eliminate(spec, train, cfg.pmax, options, names)
                dropped = {rm.column for rm in trace}
                cols = [j for j in range(spec.r) if j not in dropped]
            else:
                fit = fit_pmle(spec, train, options, covariate_names=names)
                cols = list(range(spec.r))
            sub = SeriesData(y=train.y, X=train.X[:, cols])
            fc = forecast_ahead(fit.spec, fit.gamma_hat, sub, h,
                                X_future=X[s + W:s + W + h][:, cols])
        return s, ape(y[s + W:s + W + h], fc.yhat), [names[j] for j in cols], fit.converged, None
    except Exception as exc:
        return s, None, None, False, f"{type(exc).__name__}: {exc}"


def rolling_forecast(spec: ModelSpec, data: SeriesData, cfg: RollingConfig,
                     covariate_names=None, options: FitOptions | None = None) -> RollingResult:
    """Refit on each window, forecast ``cfg.h`` steps and score against the held-out data.

    Future covariate values are taken from the data (they are known when the
    covariates are lagged at least ``h`` periods, and treated as given otherwise).
    """
    spec = replace(spec, r=data.r)
    names = list(covariate_names or getattr(data, "covariate_names", ()) or
                 [f"x{i + 1}" for i in range(data.r)])
    starts = window_starts(data.n, cfg)
    jobs = [(spec, data.y, data.X, names, int(s), cfg, options) for s in starts]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_one_window, jobs))
    else:
        results = [_one_window(j) for j in jobs]
    apes = np.full((len(starts), cfg.h), np.nan)
    kept, conv, errors = [], np.zeros(len(starts), dtype=bool), {}
    for i, (s, a, k, c, err) in enumerate(results):
        kept.append(k)
        conv[i] = c
        if err is not None:
            errors[int(s)] = err
            log.warning("window starting at %d failed: %s", s, err)
        else:
            apes[i] = a
    label = f"UWARMA({spec.p},{spec.q})"
    return RollingResult(label=label, covariate_names=tuple(names), starts=starts, ape=apes,
                         kept=kept, converged=conv, errors=errors)
