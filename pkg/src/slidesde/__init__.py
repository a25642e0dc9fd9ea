"""slidesde: stochastically perturbed sliding motion in piecewise-smooth systems.

A library + CLI that simulates the planar two-branch SDE and the 3-D relay
system, evaluates the closed-form densities, moments, variance laws and
escape-time asymptotics of the sliding analysis, and cross-checks every closed
form against an independent quadrature or Monte Carlo oracle.
"""
from .core import (
    DriftField,
    PiecewiseLinearSystem,
    RelaySystem,
    ValidityWindow,
    canonical_relay_system,
    drift_bound_radius,
    drift_field,
    make_piecewise_linear,
)

__version__ = "0.1.0"

__all__ = [
    "DriftField",
    "PiecewiseLinearSystem",
    "RelaySystem",
    "ValidityWindow",
    "canonical_relay_system",
    "drift_bound_radius",
    "drift_field",
    "make_piecewise_linear",
    "__version__",
]
