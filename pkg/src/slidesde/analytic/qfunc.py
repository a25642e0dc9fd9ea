"""The Q function: a triple integral over first-passage probabilities and its
closed form obtained by repeated integration by parts.

Q(t, a) = int_0^t (t-u) int_0^inf K e^(-2 a x/eps) int_0^u h(s, x, a) ds dx du,
K = 2 a_L a_R/(a_L + a_R).  The closed form pairs erfc(a sqrt(t)/sqrt(2 eps))
with polynomially large prefactors, so the tail group is evaluated in scaled
(erfcx) form.  q_function_quadrature integrates the triple integral directly
and is the independent oracle: the outer integral uses u = y^2 panels, and the
inner first-passage mass reuses the same s = v^2 grid, geometric in v so that
the near-zero passage peak of every x node is resolved.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import erfc, erfcx

from .._quadrature import geometric_edges, leggauss, panel_nodes, panels
from ..core import PiecewiseLinearSystem
from .passage import _h
from .qss import steady_state_K

__all__ = ["q_function", "q_function_quadrature", "q_sum_series"]

_ERFC_SCALED_CUTOVER = 5.0


def q_function(t: float, a: float, sys: PiecewiseLinearSystem) -> float:
    """Closed-form Q(t, a) with K from the system's steady state."""
    if t < 0:
        raise ValueError("need t >= 0")
    if t == 0.0:
        return 0.0
    K = steady_state_K(sys)
    eps = sys.epsilon
    g1 = K * (eps * t**2 / (4 * a) - eps**2 * t / (4 * a**3) + eps**3 / (4 * a**5))
    z = a * math.sqrt(t) / math.sqrt(2 * eps)
    pre2 = (
        K
        * math.sqrt(t / (2 * math.pi))
        * (math.sqrt(eps) * t**2 / 6 + eps**1.5 * t / (3 * a**2) - eps**2.5 / (2 * a**4))
    )
    pre3 = K * (a * t**3 / 12 + eps * t**2 / (4 * a) - eps**2 * t / (4 * a**3) + eps**3 / (4 * a**5))
    if z < _ERFC_SCALED_CUTOVER:
        g2 = pre2 * math.exp(-z * z)
        g3 = -pre3 * erfc(z)
    else:
        ez = math.log(abs(pre2)) - z * z if pre2 != 0 else -math.inf
        g2 = math.copysign(math.exp(ez) if ez > -745 else 0.0, pre2)
        ez3 = math.log(pre3) - z * z + math.log(erfcx(z))
        g3 = -(math.exp(ez3) if ez3 > -745 else 0.0)
    return g1 + g2 + g3


def q_function_quadrature(
    t: float,
    a: float,
    sys: PiecewiseLinearSystem,
    order: int = 12,
    v_ratio: float = 1.3,
) -> float:
    """Direct quadrature of the defining triple integral (oracle route)."""
    if t < 0:
        raise ValueError("need t >= 0")
    if t == 0.0:
        return 0.0
    eps = sys.epsilon
    K = steady_state_K(sys)

    # x panels graded from the origin on the eps/(2a) decay scale
    xs, xw = panels(geometric_edges(0.0, 40 * eps / a, eps / (2 * a) / 8, growth=1.25), 16)
    wx = K * np.exp(-2 * a * xs / eps) * xw
    nx = xs.size
    xg, wg = leggauss(order)

    # geometric grid in v (s = v^2) shared by the inner passage-time integrals
    vmax = math.sqrt(t)
    vmin = min(xs[0] / math.sqrt(eps), vmax) * 1e-2
    nvp = int(np.ceil(np.log(vmax / vmin) / np.log(v_ratio)))
    vedges = np.concatenate([[0.0], vmin * v_ratio ** np.arange(nvp + 1)])
    vedges[-1] = vmax
    vn, vw = panel_nodes(vedges, order)
    H = 2 * vn[..., None] * _h(vn[..., None] ** 2, xs[None, None, :], a, eps)
    panel_int = np.einsum("pq,pqx->px", vw, H)
    prefix = np.vstack([np.zeros((1, nx)), np.cumsum(panel_int, axis=0)])

    # outer u = y^2 panels, uniform in y
    wyp = max(min(math.sqrt(eps) / (2 * a) / 4.0, vmax / 12.0), vmax / 300.0)
    yedges = np.linspace(0.0, vmax, int(np.ceil(vmax / wyp)) + 1)
    yn, yw = panel_nodes(yedges, order)
    yf = yn.ravel()
    idx = np.clip(np.searchsorted(vedges, yf, side="right") - 1, 0, len(vedges) - 2)
    lo = vedges[idx]
    mid, rad = 0.5 * (yf + lo), 0.5 * (yf - lo)
    pn = mid[:, None] + rad[:, None] * xg[None, :]
    pw = rad[:, None] * wg[None, :]
    Hp = 2 * pn[..., None] * _h(pn[..., None] ** 2, xs[None, None, :], a, eps)
    cdf = prefix[idx] + np.einsum("uq,uqx->ux", pw, Hp)
    F = cdf @ wx
    return float(np.sum(yw.ravel() * 2 * yf * (t - yf * yf) * F))


def q_sum_series(t: float, sys: PiecewiseLinearSystem) -> float:
    """Small-eps series of (Q(t, a_L) + Q(t, a_R))/eps."""
    aL, aR, eps = sys.a_L, sys.a_R, sys.epsilon
    return t * t / 2 - (aL**3 + aR**3) * eps * t / (2 * aL**2 * aR**2 * (aL + aR))
