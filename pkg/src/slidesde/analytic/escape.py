"""Mean escape time from [-x_b, x_b] and its small-noise asymptotics.

The exact mean exit time solves (eps/2) T'' - U' T' = -1 with T(+-x_b) = 0,
U(x) = -int_0^x phi.  Its double-integral representation

    T(x0) = (2/eps) int_{-x_b}^{x0} e^{2U(z)/eps} ( C - I(z) ) dz,
    I(z)  = int_{-x_b}^{z} e^{-2U(y)/eps} dy,
    C     = [int e^{2U/eps} I] / [int e^{2U/eps}]   (both over [-x_b, x_b]),

is evaluated entirely in log space (panelized logsumexp) so the e^{2U/eps}
factors never overflow.  The asymptotic escape time through the lower barrier
is eps (a_L + a_R) / (2 a_L a_R |U'(exit)|) * e^{2 U(exit)/eps}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from .._quadrature import leggauss
from ..core import PiecewiseLinearSystem, drift_bound_radius
from ..errors import OutOfDomain

__all__ = ["potential", "EscapeAsymptotics", "EscapeResult", "mean_escape_time"]


def potential(x, sys: PiecewiseLinearSystem, x_b: float | None = None):
    """U(x) = -int_0^x phi(y) dy for the two-branch linear drift."""
    if x_b is None:
        x_b = drift_bound_radius(sys)
    x_arr = np.asarray(x, dtype=float)
    if np.any(np.abs(x_arr) > x_b * (1 + 1e-12)):
        raise OutOfDomain(f"|x| exceeds drift bound radius {x_b}")
    out = np.where(
        x_arr <= 0,
        -sys.a_L * x_arr - sys.c_L * x_arr**2 / 2,
        sys.a_R * x_arr - sys.c_R * x_arr**2 / 2,
    )
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class EscapeAsymptotics:
    """T ~ eps * prefactor * exp(exponent / eps)."""

    prefactor: float
    exponent: float
    potential: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class EscapeResult:
    exact: float
    asymptotic: float | None
    log_exact: float
    log_asymptotic: float | None
    asymptotics: EscapeAsymptotics | None
    degenerate: bool


def _cosine_edges(lo: float, hi: float, n: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, n + 1)
    return lo + (hi - lo) * 0.5 * (1 - np.cos(np.pi * t))


def _log_exit_core(sys, x0, xb, n_base, order):
    """log of (eps/2) T(x0) = log(C J(x0) - D(x0)) with all pieces in log space."""
    eps = sys.epsilon
    xg, wg = leggauss(order)

    def Ufun(z):
        z = np.asarray(z, dtype=float)
        return np.where(z <= 0, -sys.a_L * z - sys.c_L * z * z / 2, sys.a_R * z - sys.c_R * z * z / 2)

    edges = np.unique(np.concatenate([_cosine_edges(-xb, 0.0, n_base), _cosine_edges(0.0, xb, n_base)]))
    mids = 0.5 * (edges[1:] + edges[:-1])
    rads = 0.5 * (edges[1:] - edges[:-1])
    nodes = mids[:, None] + rads[:, None] * xg[None, :]
    logw = np.log(rads[:, None] * wg[None, :])
    Uv = Ufun(nodes)
    logA = 2 * Uv / eps + logw
    logB = -2 * Uv / eps + logw
    panelB = logsumexp(logB, axis=1)
    prefB = np.full(len(edges), -np.inf)
    for j in range(len(panelB)):
        prefB[j + 1] = np.logaddexp(prefB[j], panelB[j])

    def partial_logI(lo_edge, pref, zs):
        """log I(z) for nodes zs in the panel starting at lo_edge."""
        out = np.empty(zs.shape)
        for q in range(zs.size):
            z = zs[q]
            m2, r2 = 0.5 * (z + lo_edge), 0.5 * (z - lo_edge)
            pn = m2 + r2 * xg
            plw = np.log(np.maximum(r2 * wg, 1e-300))
            out[q] = np.logaddexp(pref, logsumexp(-2 * Ufun(pn) / eps + plw))
        return out

    logI = np.empty_like(nodes)
    for j in range(nodes.shape[0]):
        logI[j] = partial_logI(edges[j], prefB[j], nodes[j])

    logJfull = logsumexp(logA)
    logDfull = logsumexp(logA + logI)
    logC = logDfull - logJfull

    jx = int(np.clip(np.searchsorted(edges, x0, side="right") - 1, 0, len(panelB) - 1))
    per_panel_A = logsumexp(logA, axis=1)
    per_panel_AI = logsumexp(logA + logI, axis=1)
    logJ = logsumexp(per_panel_A[:jx]) if jx > 0 else -np.inf
    logD = logsumexp(per_panel_AI[:jx]) if jx > 0 else -np.inf
    lo_edge = edges[jx]
    if x0 > lo_edge:
        m2, r2 = 0.5 * (x0 + lo_edge), 0.5 * (x0 - lo_edge)
        pn = m2 + r2 * xg
        plw = np.log(np.maximum(r2 * wg, 1e-300))
        lA = 2 * Ufun(pn) / eps + plw
        lI = partial_logI(lo_edge, prefB[jx], pn)
        logJ = np.logaddexp(logJ, logsumexp(lA))
        logD = np.logaddexp(logD, logsumexp(lA + lI))
    big = logC + logJ
    # C*J - D >= 0; guard the log of the difference against roundoff
    ratio = math.exp(min(logD - big, 0.0))
    return big + math.log1p(-min(ratio, 1.0 - 1e-300))


def mean_escape_time(
    x0: float,
    sys: PiecewiseLinearSystem,
    xb: float | None = None,
    n_base: int = 48,
    order: int = 12,
) -> EscapeResult:
    """Exact (quadrature) and asymptotic mean escape times from [-xb, xb]."""
    if xb is None:
        xb = drift_bound_radius(sys)
    if not (-xb < x0 < xb):
        raise OutOfDomain(f"need |x0| < xb = {xb}")
    eps = sys.epsilon
    log_core = _log_exit_core(sys, x0, xb, n_base, order)
    log_exact = math.log(2.0 / eps) + log_core
    exact = math.exp(log_exact) if log_exact < 709 else math.inf

    U_hi = float(potential(xb, sys, xb))
    U_lo = float(potential(-xb, sys, xb))
    if math.isclose(U_hi, U_lo, rel_tol=1e-12, abs_tol=1e-14):
        return EscapeResult(exact, None, log_exact, None, None, degenerate=True)
    if U_hi < U_lo:
        slope = sys.a_R - sys.c_R * xb  # U'(xb) > 0
        exponent = 2 * U_hi
    else:
        slope = sys.a_L - sys.c_L * xb  # -U'(-xb) > 0
        exponent = 2 * U_lo
    pref = (sys.a_L + sys.a_R) / (2 * sys.a_L * sys.a_R * slope)
    log_asym = math.log(eps * pref) + exponent / eps
    asym = math.exp(log_asym) if log_asym < 709 else math.inf
    asymptotics = EscapeAsymptotics(
        prefactor=pref, exponent=exponent, potential=lambda z: potential(z, sys, xb)
    )
    return EscapeResult(exact, asym, log_exact, log_asym, asymptotics, degenerate=False)
