"""Sliding solution, mean and variance of the tangential coordinate y(t).

All formulas assume x is started from (and stays in) the quasi-steady state,
which holds for t inside the validity window [eps^(1-delta), eps^-M].
"""
from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.special import erfc, erfcx

from ..core import PiecewiseLinearSystem, ValidityWindow
from ..errors import WindowViolation

__all__ = [
    "sliding_solution",
    "mean_y",
    "variance_y_leading",
    "variance_y_exact_symmetric",
    "sgn_autocorrelation_integral",
]

_ERFC_SCALED_CUTOVER = 5.0


def sliding_solution(sys: PiecewiseLinearSystem, y0: float, t: float) -> float:
    """Filippov sliding solution: y0 + t (a_R b_L + a_L b_R)/(a_L + a_R)."""
    return y0 + t * (sys.a_R * sys.b_L + sys.a_L * sys.b_R) / (sys.a_L + sys.a_R)


def mean_y(
    sys: PiecewiseLinearSystem,
    y0: float,
    t: float,
    window: ValidityWindow = ValidityWindow(),
) -> float:
    """Mean of y(t) to first order in eps beyond the sliding solution."""
    if not window.contains(t, sys.epsilon):
        lo, hi = window.bounds(sys.epsilon)
        warnings.warn(
            f"t={t} outside validity window [{lo:.4g}, {hi:.4g}]", WindowViolation,
            stacklevel=2,
        )
    aL, aR = sys.a_L, sys.a_R
    num = (aL**2 * sys.d_R - aR**2 * sys.d_L) * (aL + aR) - (
        aL**2 * sys.c_R - aR**2 * sys.c_L
    ) * (sys.b_L - sys.b_R)
    correction = num * sys.epsilon * t / (2 * aL * aR * (aL + aR) ** 2)
    return sliding_solution(sys, y0, t) + correction


def variance_y_leading(sys: PiecewiseLinearSystem, t: float) -> float:
    """Leading-order variance eps*kappa*t + (b_L - b_R)^2 eps t / (a_L + a_R)^2."""
    db = sys.b_L - sys.b_R
    return sys.epsilon * sys.kappa * t + db * db * sys.epsilon * t / (sys.a_L + sys.a_R) ** 2


def _scaled_erfc_sum(terms, z: float) -> float:
    """sum_i c_i * erfc(z) with each product computed as exp(log|c_i| - z^2 + log erfcx(z))."""
    if z < _ERFC_SCALED_CUTOVER:
        return math.fsum(c for c in terms) * erfc(z)
    log_tail = -z * z + math.log(erfcx(z))
    out = 0.0
    for c in terms:
        if c != 0.0:
            out += math.copysign(math.exp(math.log(abs(c)) + log_tail), c)
    return out


def _scaled_gauss_sum(terms, z: float) -> float:
    """sum_i c_i * exp(-z^2), term by term in log form to dodge under/overflow pairing."""
    out = 0.0
    for c in terms:
        if c != 0.0:
            ex = math.log(abs(c)) - z * z
            out += math.copysign(math.exp(ex) if ex > -745 else 0.0, c)
    return out


def variance_y_exact_symmetric(
    a: float, b_L: float, b_R: float, epsilon: float, t: float, kappa: float = 0.0
) -> float:
    """Exact Var(y(t)) for a_L = a_R = a (stationary start), plus the eps*kappa*t term.

    The erfc and exp(-a^2 t / 2 eps) groups are evaluated in scaled form so that
    large polynomial prefactors never multiply an underflowed tail.
    """
    if a <= 0:
        raise ValueError("need a > 0")
    if t < 0:
        raise ValueError("need t >= 0")
    if t == 0:
        return 0.0
    eps = epsilon
    db = b_L - b_R
    z = a * math.sqrt(t) / math.sqrt(2 * eps)
    pre = math.sqrt(2 * t / (math.pi * eps))
    gauss = _scaled_gauss_sum(
        (pre * eps**2 / a**3, -pre * 2 * eps * t / (3 * a), -pre * a * t**2 / 3), z
    )
    tail = _scaled_erfc_sum(
        (eps**2 / a**4, -eps * t / a**2, t * t, a * a * t**3 / (3 * eps)), z
    )
    body = eps * t / a**2 - eps**2 / a**4 + gauss + tail
    return db * db / 4 * body + eps * kappa * t


def sgn_autocorrelation_integral(
    sys: PiecewiseLinearSystem,
    t: float,
    window: ValidityWindow = ValidityWindow(),
) -> float:
    """int_0^t int_0^t <sgn x(s) sgn x(u)> ds du for the piecewise-constant case."""
    if t < sys.epsilon ** (1.0 - window.delta):
        warnings.warn(
            f"t={t} below validity window floor eps^(1-delta)", WindowViolation,
            stacklevel=2,
        )
    aL, aR, eps = sys.a_L, sys.a_R, sys.epsilon
    s = (aL + aR) ** 2
    return (aL - aR) ** 2 * t * t / s + 4 * eps * t / s
