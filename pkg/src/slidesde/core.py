"""Domain types for the planar piecewise-linear model and the 3-D relay system.

The planar model is the pair of SDEs

    dx = phi(x) dt + sqrt(eps) dW1,   dy = psi(x) dt + sqrt(eps*kappa) dW2,

with two-branch linear drifts

    phi(x) = a_L + c_L x  (x < 0),   -a_R + c_R x  (x > 0),
    psi(x) = b_L + d_L x  (x < 0),    b_R + d_R x  (x > 0),

and a_L, a_R > 0 so that x = 0 attracts from both sides.  Both drifts are
evaluated as 0 at x = 0 exactly (a measure-zero convention that only matters
on the simulation grid).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BadNoise, NonAttracting

__all__ = [
    "PiecewiseLinearSystem",
    "DriftField",
    "RelaySystem",
    "ValidityWindow",
    "make_piecewise_linear",
    "drift_bound_radius",
    "drift_field",
    "canonical_relay_system",
]


@dataclass(frozen=True)
class PiecewiseLinearSystem:
    """Coefficients of the planar model; immutable and safe to share."""

    a_L: float
    a_R: float
    b_L: float = 0.0
    b_R: float = 0.0
    c_L: float = 0.0
    c_R: float = 0.0
    d_L: float = 0.0
    d_R: float = 0.0
    epsilon: float = 0.01
    kappa: float = 0.0

    def __post_init__(self):
        if not (self.a_L > 0 and self.a_R > 0):
            raise NonAttracting(f"need a_L, a_R > 0, got a_L={self.a_L}, a_R={self.a_R}")
        if not (self.epsilon > 0):
            raise BadNoise(f"need epsilon > 0, got {self.epsilon}")
        if self.kappa < 0:
            raise BadNoise(f"need kappa >= 0, got {self.kappa}")

    def phi(self, x):
        """Normal drift; phi(0) = 0 by convention."""
        x = np.asarray(x, dtype=float)
        out = np.where(
            x < 0, self.a_L + self.c_L * x, np.where(x > 0, -self.a_R + self.c_R * x, 0.0)
        )
        return out if out.ndim else float(out)

    def psi(self, x):
        """Tangential drift; psi(0) = 0 by convention."""
        x = np.asarray(x, dtype=float)
        out = np.where(
            x < 0, self.b_L + self.d_L * x, np.where(x > 0, self.b_R + self.d_R * x, 0.0)
        )
        return out if out.ndim else float(out)

    @property
    def is_piecewise_constant(self) -> bool:
        return self.c_L == 0.0 and self.c_R == 0.0 and self.d_L == 0.0 and self.d_R == 0.0

    @property
    def is_symmetric(self) -> bool:
        return self.a_L == self.a_R and self.c_L == self.c_R


def make_piecewise_linear(
    a_L: float,
    a_R: float,
    b_L: float = 0.0,
    b_R: float = 0.0,
    c_L: float = 0.0,
    c_R: float = 0.0,
    d_L: float = 0.0,
    d_R: float = 0.0,
    *,
    epsilon: float,
    kappa: float = 0.0,
) -> PiecewiseLinearSystem:
    """Validate coefficients and build a PiecewiseLinearSystem."""
    return PiecewiseLinearSystem(a_L, a_R, b_L, b_R, c_L, c_R, d_L, d_R, epsilon, kappa)


def drift_bound_radius(sys: PiecewiseLinearSystem, x_cap: float = 1.0) -> float:
    """Largest x_b <= x_cap with |phi| >= min(a_L, a_R)/2 on [-x_b, x_b].

    Each branch is linear, so the bound can only fail at the outer endpoint:
    the left branch a_L + c_L x decays toward -x_b only when c_L > 0, and the
    right branch -a_R + c_R x toward +x_b only when c_R > 0.  For
    piecewise-constant drift the cap is returned.
    """
    m = 0.5 * min(sys.a_L, sys.a_R)
    x_b = x_cap
    if sys.c_L > 0:
        x_b = min(x_b, (sys.a_L - m) / sys.c_L)
    if sys.c_R > 0:
        x_b = min(x_b, (sys.a_R - m) / sys.c_R)
    return x_b


@dataclass(frozen=True)
class DriftField:
    """Global drift pair with the radius on which the inward-drift bound holds."""

    phi: Callable[[np.ndarray], np.ndarray]
    psi: Callable[[np.ndarray], np.ndarray]
    x_b: float


def drift_field(sys: PiecewiseLinearSystem, x_cap: float = 1.0) -> DriftField:
    return DriftField(phi=sys.phi, psi=sys.psi, x_b=drift_bound_radius(sys, x_cap))


@dataclass(frozen=True)
class RelaySystem:
    """Relay feedback system x' = A x + B u, u = -sgn(C^T x)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    zeta: float = 0.0

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float).ravel()
        C = np.asarray(self.C, dtype=float).ravel()
        n = B.shape[0]
        if A.shape != (n, n) or C.shape != (n,):
            raise ValueError(f"inconsistent shapes A{A.shape} B{B.shape} C{C.shape}")
        if C @ B == 0:
            raise ValueError("C^T B = 0: equivalent control undefined")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)


def canonical_relay_system(zeta: float = -0.06) -> RelaySystem:
    """The third-order canonical relay model used throughout the relay experiments."""
    A = np.array(
        [
            [-20.0 * zeta - 1.0 / 20.0, 1.0, 0.0],
            [-zeta - 100.0, 0.0, 1.0],
            [-5.0, 0.0, 0.0],
        ]
    )
    B = np.array([1.0, -2.0, 1.0])
    C = np.array([1.0, 0.0, 0.0])
    return RelaySystem(A=A, B=B, C=C, zeta=zeta)


@dataclass(frozen=True)
class ValidityWindow:
    """Time window [eps^(1-delta), eps^-M] on which quasi-steady-state results apply."""

    delta: float = 0.1
    M: float = 2.0

    def __post_init__(self):
        if not (0 < self.delta and self.M > 0):
            raise ValueError("need delta > 0 and M > 0")

    def bounds(self, epsilon: float) -> tuple[float, float]:
        return epsilon ** (1.0 - self.delta), epsilon ** (-self.M)

    def contains(self, t: float, epsilon: float) -> bool:
        lo, hi = self.bounds(epsilon)
        return lo <= t <= hi
