"""Strictly increasing links g: (0, 1) -> R with inverses and derivatives.

Scalar kernels are numba-compiled so the recursion engine can call them; the
public functions below accept scalars or arrays.
"""

from __future__ import annotations

import enum
import math

import numpy as np
from numba import njit

from .uw_dist import DomainError

# saturation of g^{-1}: outputs never leave [EPS, 1 - EPS]
EPS = 1e-12

LOGIT, PROBIT, LOGLOG, CLOGLOG = 0, 1, 2, 3


class LinkKind(str, enum.Enum):
    LOGIT = "logit"
    PROBIT = "probit"
    LOGLOG = "loglog"
    CLOGLOG = "cloglog"

    @property
    def code(self) -> int:
        return _CODES[self]

    @classmethod
    def parse(cls, value) -> "LinkKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown link {value!r}; expected one of {names}") from None


_CODES = {LinkKind.LOGIT: LOGIT, LinkKind.PROBIT: PROBIT,
          LinkKind.LOGLOG: LOGLOG, LinkKind.CLOGLOG: CLOGLOG}

# Acklam's rational approximation to the standard normal quantile,
# relative error below 1.15e-9 before the Halley refinement in _ndtri.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


@njit(cache=True)
def _norm_cdf(x):
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


@njit(cache=True)
def _ndtri(p):
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    elif p <= 1.0 - _P_LOW:
        q = p - 0.5
        s = q * q
        x = ((((((_A[0] * s + _A[1]) * s + _A[2]) * s + _A[3]) * s + _A[4]) * s + _A[5]) * q
             / (((((_B[0] * s + _B[1]) * s + _B[2]) * s + _B[3]) * s + _B[4]) * s + 1.0))
    else:
        q = math.sqrt(-2.0 * math.log1p(-p))
        x = -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
              / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    # one Halley step brings the error to rounding level
    if p < 0.5:
        e = _norm_cdf(x) - p
    else:
        e = (1.0 - p) - 0.5 * math.erfc(x / math.sqrt(2.0))
    u = e * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


@njit(cache=True)
def link_scalar(code, mu):
    if code == LOGIT:
        return math.log(mu) - math.log1p(-mu)
    if code == PROBIT:
        return _ndtri(mu)
    if code == LOGLOG:
        return -math.log(-math.log(mu))
    return math.log(-math.log1p(-mu))


@njit(cache=True)
def linkinv_raw(code, eta):
    """g^{-1} without saturation (may return exactly 0 or 1)."""
    if code == LOGIT:
        if eta >= 0.0:
            return 1.0 / (1.0 + math.exp(-eta))
        z = math.exp(eta)
        return z / (1.0 + z)
    if code == PROBIT:
        return _norm_cdf(eta)
    if code == LOGLOG:
        return math.exp(-math.exp(-eta))
    return -math.expm1(-math.exp(eta))


@njit(cache=True)
def linkinv_scalar(code, eta):
    m = linkinv_raw(code, eta)
    if m < EPS:
        return EPS
    if m > 1.0 - EPS:
        return 1.0 - EPS
    return m


@njit(cache=True)
def dlink_scalar(code, mu):
    """g'(mu)."""
    if code == LOGIT:
        return 1.0 / (mu * (1.0 - mu))
    if code == PROBIT:
        x = _ndtri(mu)
        return math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    if code == LOGLOG:
        return -1.0 / (mu * math.log(mu))
    return -1.0 / ((1.0 - mu) * math.log1p(-mu))


@njit(cache=True)
def _map(fn_id, code, x):
    out = np.empty_like(x)
    for i in range(x.size):
        if fn_id == 0:
            out[i] = link_scalar(code, x[i])
        elif fn_id == 1:
            out[i] = linkinv_scalar(code, x[i])
        else:
            out[i] = dlink_scalar(code, x[i])
    return out


def _apply(fn_id, kind, x, check_unit):
    arr = np.asarray(x, dtype=float)
    if check_unit and np.any(~((arr > 0.0) & (arr < 1.0))):
        raise DomainError("link argument must lie strictly inside (0, 1)")
    if not check_unit and np.any(np.isnan(arr)):
        raise DomainError("linear predictor is NaN")
    out = _map(fn_id, LinkKind.parse(kind).code, np.ascontiguousarray(arr.ravel()))
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def link_eval(kind, mu):
    """g(mu)."""
    return _apply(0, kind, mu, True)


def link_inv(kind, eta):
    """g^{-1}(eta), saturated to [EPS, 1 - EPS]."""
    return _apply(1, kind, eta, False)


def link_deriv(kind, mu):
    """g'(mu); positive for every supported link."""
    return _apply(2, kind, mu, True)


def norm_ppf(p):
    """Standard normal quantile (shares the probit implementation)."""
    return link_eval(LinkKind.PROBIT, p)


def norm_sf(x):
    """Upper tail of the standard normal."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))
