"""Steady-state and quasi-steady-state densities of the x-equation.

The piecewise-constant case has a true steady state

    p_ss(x) = (K/eps) exp(2 a_L x/eps)  (x < 0),  (K/eps) exp(-2 a_R x/eps)  (x > 0),
    K = 2 a_L a_R / (a_L + a_R).

With linear drift slopes the WKB construction gives the quasi-steady state
whose log-density exponent gains the quadratic terms c_{L,R} x^2; it is only
defined up to the drift-bound radius and is normalized numerically there.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._quadrature import geometric_edges, panels
from ..core import PiecewiseLinearSystem, drift_bound_radius
from ..errors import OutOfDomain

__all__ = [
    "steady_state_K",
    "steady_state_pdf",
    "QssDensity",
    "QssMoments",
    "qss_pdf",
    "qss_moments",
    "K_series",
    "sgn_mean_series",
    "x_mean_series",
    "xsgn_mean_series",
]


def steady_state_K(sys: PiecewiseLinearSystem) -> float:
    return 2 * sys.a_L * sys.a_R / (sys.a_L + sys.a_R)


def steady_state_pdf(x, sys: PiecewiseLinearSystem):
    """True steady state of the piecewise-constant case (requires c_L = c_R = 0)."""
    if sys.c_L != 0.0 or sys.c_R != 0.0:
        raise ValueError("steady_state_pdf requires piecewise-constant drift (c_L = c_R = 0)")
    eps = sys.epsilon
    K = steady_state_K(sys)
    x = np.asarray(x, dtype=float)
    out = (K / eps) * np.exp(np.where(x < 0, 2 * sys.a_L * x, -2 * sys.a_R * x) / eps)
    return out if out.ndim else float(out)


def K_series(sys: PiecewiseLinearSystem) -> float:
    """Two-term small-eps expansion of the quasi-steady-state normalization."""
    aL, aR, eps = sys.a_L, sys.a_R, sys.epsilon
    return steady_state_K(sys) - (aL**3 * sys.c_R + aR**3 * sys.c_L) * eps / (
        aL * aR * (aL + aR) ** 2
    )


def sgn_mean_series(sys: PiecewiseLinearSystem) -> float:
    aL, aR, eps = sys.a_L, sys.a_R, sys.epsilon
    return (aL - aR) / (aL + aR) + (aL**2 * sys.c_R - aR**2 * sys.c_L) * eps / (
        aL * aR * (aL + aR) ** 2
    )


def x_mean_series(sys: PiecewiseLinearSystem) -> float:
    return (sys.a_L - sys.a_R) * sys.epsilon / (2 * sys.a_L * sys.a_R)


def xsgn_mean_series(sys: PiecewiseLinearSystem) -> float:
    aL, aR = sys.a_L, sys.a_R
    return (aL**2 + aR**2) * sys.epsilon / (2 * aL * aR * (aL + aR))


@dataclass(frozen=True)
class QssMoments:
    mean_sgn: float
    mean_x: float
    mean_xsgn: float


class QssDensity:
    """Quasi-steady-state density, normalized numerically on [-truncation, truncation].

    The branch log-exponents are q(x)/eps with q(x) = 2 a_L x + c_L x^2 (x <= 0)
    and -2 a_R x + c_R x^2 (x >= 0); K_eps = eps / int exp(q/eps).
    """

    def __init__(self, system: PiecewiseLinearSystem, truncation: float | None = None,
                 order: int = 24):
        self.system = system
        self.truncation = float(
            drift_bound_radius(system) if truncation is None else truncation
        )
        if self.truncation <= 0:
            raise ValueError("truncation radius must be positive")
        eps = system.epsilon
        w0 = eps / (2 * max(system.a_L, system.a_R)) / 4
        nodes_w = []
        for sgn in (-1.0, 1.0):
            edges = sgn * geometric_edges(0.0, self.truncation, w0, growth=1.4)
            ns, ws = panels(np.sort(edges), order)
            nodes_w.append((ns, np.abs(ws)))
        self._nodes = np.concatenate([nodes_w[0][0], nodes_w[1][0]])
        self._weights = np.concatenate([nodes_w[0][1], nodes_w[1][1]])
        Z = float(np.exp(self._log_branch(self._nodes)) @ self._weights)
        self.K_eps = eps / Z

    def _log_branch(self, x):
        sys, eps = self.system, self.system.epsilon
        x = np.asarray(x, dtype=float)
        return np.where(
            x <= 0, 2 * sys.a_L * x + sys.c_L * x * x, -2 * sys.a_R * x + sys.c_R * x * x
        ) / eps

    def log_pdf(self, x):
        x_arr = np.asarray(x, dtype=float)
        if np.any(np.abs(x_arr) > self.truncation * (1 + 1e-12)):
            raise OutOfDomain(f"|x| exceeds truncation radius {self.truncation}")
        out = np.log(self.K_eps / self.system.epsilon) + self._log_branch(x_arr)
        return out if out.ndim else float(out)

    def pdf(self, x):
        out = np.exp(self.log_pdf(x))
        return out if np.ndim(out) else float(out)

    def normalization_check(self) -> float:
        """int pdf over the truncated domain (1 up to quadrature error)."""
        return float(np.exp(self.log_pdf(self._nodes)) @ self._weights)

    def moments(self) -> QssMoments:
        """<sgn x>, <x>, <x sgn x> by quadrature against the density."""
        p = np.exp(self.log_pdf(self._nodes)) * self._weights
        xs = self._nodes
        return QssMoments(
            mean_sgn=float(np.sign(xs) @ p),
            mean_x=float(xs @ p),
            mean_xsgn=float(np.abs(xs) @ p),
        )

    def branch_masses(self) -> tuple[float, float]:
        """Probability mass of each branch (left, right) under the density."""
        p = np.exp(self.log_pdf(self._nodes)) * self._weights
        wL = float(p[self._nodes <= 0].sum())
        wR = float(p[self._nodes > 0].sum())
        return wL / (wL + wR), wR / (wL + wR)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw n points: exact inverse-CDF per branch for c = 0, rejection against
        the reduced-rate exponential envelope for c != 0."""
        sys, eps, R = self.system, self.system.epsilon, self.truncation
        wL, wR = self.branch_masses()
        u = rng.uniform(size=n)
        left = u < wL
        out = np.empty(n)
        for mask, a, c, sgn, w_branch, u_lo in (
            (left, sys.a_L, sys.c_L, -1.0, wL, 0.0),
            (~left, sys.a_R, sys.c_R, 1.0, wR, wL),
        ):
            m = int(mask.sum())
            if m == 0:
                continue
            uu = (u[mask] - u_lo) / w_branch  # reuse of the branch-choice uniform
            lam = (2 * a - max(c, 0.0) * R) / eps
            if lam <= 0:
                raise ValueError("rejection envelope invalid: truncation exceeds drift bound radius")
            tail = 1.0 - np.exp(-lam * R)
            if c == 0.0:
                out[mask] = sgn * (-np.log1p(-uu * tail) / lam)
                continue
            vals = np.empty(m)
            todo = np.arange(m)
            cand = -np.log1p(-uu * tail) / lam
            while todo.size:
                log_acc = (c * cand * cand - max(c, 0.0) * R * cand) / eps
                acc = np.log(rng.uniform(size=todo.size)) < log_acc
                vals[todo[acc]] = cand[acc]
                todo = todo[~acc]
                if todo.size:
                    cand = -np.log1p(-rng.uniform(size=todo.size) * tail) / lam
            out[mask] = sgn * vals
        return out


def qss_pdf(x, q: QssDensity):
    """Functional wrapper around QssDensity.pdf."""
    return q.pdf(x)


def qss_moments(q: QssDensity) -> QssMoments:
    """Functional wrapper around QssDensity.moments."""
    return q.moments()
