"""Transition density of Brownian motion with two-valued drift.

For dx = (a_L if x<0 else -a_R) dt + sqrt(eps) dW the density p(x, t | x0) is
a sum of an image-charge part (same-side, never-crossed paths) and a crossing
part: an integral over b >= 0 of time-convolutions h * h of two first-passage
densities, weighted by the exponential steady-state factor of the arrival
side.  The b-integral is evaluated on graded Gauss-Legendre panels that are
refined until two levels agree; each time-convolution is an adaptive
vector-valued quadrature with the endpoint substitution tau = s^2 applied to
both ends to tame the t^(-3/2) first-passage prefactors.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad_vec
from scipy.special import erfc

from .._quadrature import geometric_edges, graded_edges, panels
from ..errors import BadTime, NonAttracting, QuadratureFailure
from .passage import _h, _h_dz, absorbed_density

__all__ = ["QuadratureSettings", "TransitionDensity", "transition_pdf"]


@dataclass(frozen=True)
class QuadratureSettings:
    """Tolerances for the nested convolution quadrature."""

    rtol: float = 1e-9
    atol: float = 1e-11
    inner_rtol: float = 1e-10
    max_refine: int = 4
    max_subdivisions: int = 2000

    def __post_init__(self):
        if self.rtol <= 0 or self.atol < 0:
            raise ValueError("need rtol > 0 and atol >= 0")


@dataclass(frozen=True)
class TransitionDensity:
    a_L: float
    a_R: float
    epsilon: float
    quadrature: QuadratureSettings = field(default_factory=QuadratureSettings)

    def __post_init__(self):
        if not (self.a_L > 0 and self.a_R > 0):
            raise NonAttracting("need a_L, a_R > 0")
        if self.epsilon <= 0:
            raise ValueError("need epsilon > 0")

    # -- internals ---------------------------------------------------------

    def _b_edges(self, t, x_extent, x0):
        scale = (self.a_L + self.a_R) * t + abs(x0) + x_extent + 12 * np.sqrt(self.epsilon * t)
        w0 = min(np.sqrt(self.epsilon * t), self.epsilon)
        return geometric_edges(0.0, scale, w0, growth=2.0)

    def _crossing_part(self, t, x, x0, side, kernel=_h):
        """B(x) = int_0^inf conv(b; z1, z2) db with the case shifts for the given side.

        side selects the arrival half-line ("left" for x <= 0, "right" for x >= 0).
        kernel replaces the a_R-side first-passage factor; passing the z-derivative
        kernel yields d/dx of the same integral (used by the flux).
        """
        q = self.quadrature
        x = np.atleast_1d(np.asarray(x, dtype=float))
        edges = self._b_edges(t, float(np.max(np.abs(x))) if x.size else 0.0, x0)

        def z_arrays(b):
            B = b[None, :]
            X = x[:, None]
            if x0 <= 0:
                if side == "left":
                    return B + 0 * X, B - X - x0
                return B + X, B - x0 + 0 * X
            if side == "left":
                return B + x0 + 0 * X, B - X
            return B + X + x0, B + 0 * X

        def conv_with_kernel(b):
            Z1, Z2 = z_arrays(b)
            eps, aL, aR = self.epsilon, self.a_L, self.a_R
            half = np.sqrt(t / 2.0)

            def integrand(s):
                tau = s * s
                f = kernel(tau, Z1, aR, eps) * _h(t - tau, Z2, aL, eps)
                g = kernel(t - tau, Z1, aR, eps) * _h(tau, Z2, aL, eps)
                return 2 * s * (f + g)

            val, _ = quad_vec(
                integrand, 0.0, half,
                epsabs=1e-300, epsrel=q.inner_rtol, norm="max",
                limit=q.max_subdivisions,
            )
            return val

        prev = None
        for _ in range(q.max_refine + 1):
            b, wb = panels(edges, order=16)
            val = conv_with_kernel(b) @ wb
            if prev is not None and np.all(
                np.abs(val - prev) <= q.atol + q.rtol * np.max(np.abs(val))
            ):
                return val
            prev = val
            edges = np.sort(np.concatenate([edges, 0.5 * (edges[1:] + edges[:-1])]))
        raise QuadratureFailure(
            f"b-integral did not converge within {q.max_refine} refinements (t={t}, x0={x0})"
        )

    # -- public surface ------------------------------------------------------

    def pdf(self, x, t: float, x0: float = 0.0):
        """p(x, t | x0); x may be a scalar or an array."""
        if t <= 0:
            raise BadTime(f"need t > 0, got {t}")
        eps, aL, aR = self.epsilon, self.a_L, self.a_R
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x_arr)

        neg = x_arr <= 0
        for mask, side in ((neg, "left"), (~neg, "right")):
            if not np.any(mask):
                continue
            xs = x_arr[mask]
            core = self._crossing_part(t, xs, x0, side)
            if side == "left":
                val = (2 / eps) * np.exp(2 * aL * xs / eps) * core
                if x0 <= 0:
                    val = val + absorbed_density(xs, t, aL, x0, eps)
            else:
                val = (2 / eps) * np.exp(-2 * aR * xs / eps) * core
                if x0 > 0:
                    val = val + absorbed_density(xs, t, -aR, x0, eps)
            out[mask] = val
        out = np.maximum(out, 0.0)
        return out if np.ndim(x) else float(out[0])

    def pdf_symmetric_closed(self, x, t: float, x0: float = 0.0):
        """Closed form valid only for a_L = a_R (cross-check route)."""
        if self.a_L != self.a_R:
            raise ValueError("closed form requires a_L == a_R")
        if t <= 0:
            raise BadTime(f"need t > 0, got {t}")
        a, eps = self.a_L, self.epsilon
        x = np.asarray(x, dtype=float)
        term1 = (
            np.exp((a / eps) * (abs(x0) - np.abs(x) - a * t / 2))
            * np.exp(-((x - x0) ** 2) / (2 * eps * t))
            / np.sqrt(2 * np.pi * eps * t)
        )
        z = (np.abs(x) + abs(x0) - a * t) / np.sqrt(2 * eps * t)
        term2 = (a / (2 * eps)) * np.exp(-2 * a * np.abs(x) / eps) * erfc(z)
        out = term1 + term2
        return out if out.ndim else float(out)

    def support_interval(self, t: float, x0: float = 0.0) -> tuple[float, float]:
        """Interval outside which p(x, t | x0) is negligible (< ~1e-18 relative)."""
        eps = self.epsilon
        spread = 10 * np.sqrt(eps * t)
        lo = min(x0, 0.0) - spread - 21 * eps / self.a_L
        hi = max(x0, 0.0) + spread + 21 * eps / self.a_R
        return lo, hi

    def _x_panels(self, t, x0, lo, hi, order=16):
        w0 = min(self.epsilon, np.sqrt(self.epsilon * t)) / 2
        edges = graded_edges(lo, hi, [0.0, x0], w0, growth=1.8)
        return panels(edges, order=order)

    def normalization(self, t: float, x0: float = 0.0) -> float:
        """int p(x, t | x0) dx, by quadrature; equals 1 up to tolerance."""
        lo, hi = self.support_interval(t, x0)
        total = 0.0
        for a, b in ((lo, 0.0), (0.0, hi)):
            xs, ws = self._x_panels(t, x0, a, b)
            total += float(self.pdf(xs, t, x0) @ ws)
        return total

    def right_mass(self, t: float, x0: float = 0.0) -> float:
        """int_0^inf p(x, t | x0) dx (probability of x(t) > 0)."""
        _, hi = self.support_interval(t, x0)
        xs, ws = self._x_panels(t, x0, 0.0, hi)
        return float(self.pdf(xs, t, x0) @ ws)

    def flux_kernel(self, t: float) -> float:
        """a_R p(0,t|0) + (eps/2) d/dx+ p(0,t|0), with the cancellation done analytically.

        With p(x,t|0) = (2/eps) e^(-2 a_R x/eps) B(x,t) for x >= 0, the two terms
        reduce exactly to dB/dx(0,t), the b-integral of the z-differentiated kernel.
        """
        if t <= 0:
            raise BadTime(f"need t > 0, got {t}")
        val = self._crossing_part(t, np.array([0.0]), 0.0, "right", kernel=_h_dz)
        return float(val[0])

    def flux_fd(self, t: float) -> float:
        """Same flux via the one-sided three-point stencil at {h, 2h, 3h}, h = eps/100,
        Richardson-extrapolated with the half-step estimate.  Well-conditioned only
        while the derivative term has not yet cancelled against a_R p (t up to ~eps)."""
        if t <= 0:
            raise BadTime(f"need t > 0, got {t}")
        eps, aR = self.epsilon, self.a_R
        h = eps / 100.0
        xs = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 3.0]) * h
        p = self.pdf(xs, t, 0.0)
        d_h = (-2.5 * p[2] + 4.0 * p[4] - 1.5 * p[5]) / h
        d_h2 = (-2.5 * p[1] + 4.0 * p[2] - 1.5 * p[3]) / (h / 2)
        d = (4.0 * d_h2 - d_h) / 3.0
        return float(aR * p[0] + 0.5 * eps * d)


def transition_pdf(x, t: float, x0: float, td: TransitionDensity):
    """Functional wrapper around TransitionDensity.pdf."""
    return td.pdf(x, t, x0)
