"""First-passage and absorbed-boundary densities for drifted Brownian motion.

h(t, x0, mu) is the density of the first hitting time of zero for the process
dx = -mu dt + sqrt(eps) dW started at x0; G_absorb is the transition density
of dx = mu dt + sqrt(eps) dW with an absorbing boundary at zero.
"""
from __future__ import annotations

import numpy as np

from ..errors import BadTime

__all__ = [
    "first_passage_density",
    "first_passage_laplace",
    "absorbed_density",
]


def _h(t, z, mu, epsilon):
    """Internal h evaluator: vectorized, silently 0 for t <= 0."""
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=float)
    ok = t > 0
    tt = np.where(ok, t, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.abs(z) / np.sqrt(2 * np.pi * epsilon * tt**3) * np.exp(
            -((z - mu * tt) ** 2) / (2 * epsilon * tt)
        )
    return np.where(ok, val, 0.0)


def _h_over_z(t, z, mu, epsilon):
    """h(t, z, mu)/z for z >= 0, finite at z = 0."""
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=float)
    ok = t > 0
    tt = np.where(ok, t, 1.0)
    val = np.exp(-((z - mu * tt) ** 2) / (2 * epsilon * tt)) / np.sqrt(
        2 * np.pi * epsilon * tt**3
    )
    return np.where(ok, val, 0.0)


def _h_dz(t, z, mu, epsilon):
    """d/dz h(t, z, mu) for z > 0 (right limit at z = 0)."""
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=float)
    ok = t > 0
    tt = np.where(ok, t, 1.0)
    fac = 1.0 - z * (z - mu * tt) / (epsilon * tt)
    return np.where(ok, fac * _h_over_z(t, z, mu, epsilon), 0.0)


def first_passage_density(t, x0: float, mu: float, epsilon: float):
    """h_eps(t, x0, mu) = |x0|/sqrt(2 pi eps t^3) exp(-(x0 - mu t)^2 / (2 eps t))."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise BadTime(f"need t > 0, got {t}")
    out = _h(t_arr, x0, mu, epsilon)
    return out if out.ndim else float(out)


def first_passage_laplace(lam, z: float, mu: float, epsilon: float):
    """Laplace transform of h in t: exp((mu z - sqrt(mu^2 + 2 eps lam)|z|)/eps)."""
    lam = np.asarray(lam, dtype=float)
    out = np.exp((mu * z - np.sqrt(mu * mu + 2 * epsilon * lam) * abs(z)) / epsilon)
    return out if out.ndim else float(out)


def absorbed_density(x, t: float, mu: float, x0: float, epsilon: float):
    """Image-charge density with absorption at 0: the two Gaussians cancel at x = 0."""
    if t <= 0:
        raise BadTime(f"need t > 0, got {t}")
    x = np.asarray(x, dtype=float)
    pref = 1.0 / np.sqrt(2 * np.pi * epsilon * t)
    g1 = np.exp(-((x - x0 - mu * t) ** 2) / (2 * epsilon * t))
    g2 = np.exp(-2 * mu * x0 / epsilon - ((x + x0 - mu * t) ** 2) / (2 * epsilon * t))
    out = pref * (g1 - g2)
    return out if out.ndim else float(out)
