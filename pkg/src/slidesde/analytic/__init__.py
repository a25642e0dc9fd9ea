"""Closed-form densities, moments, and escape asymptotics with quadrature oracles."""
from .escape import EscapeAsymptotics, EscapeResult, mean_escape_time, potential
from .flux import FluxIntegrals, flux_time_integrals, lemma_flux
from .passage import absorbed_density, first_passage_density, first_passage_laplace
from .qfunc import q_function, q_function_quadrature, q_sum_series
from .qss import (
    K_series,
    QssDensity,
    QssMoments,
    qss_moments,
    qss_pdf,
    sgn_mean_series,
    steady_state_K,
    steady_state_pdf,
    x_mean_series,
    xsgn_mean_series,
)
from .sliding import (
    mean_y,
    sgn_autocorrelation_integral,
    sliding_solution,
    variance_y_exact_symmetric,
    variance_y_leading,
)
from .transition import QuadratureSettings, TransitionDensity, transition_pdf

__all__ = [
    "EscapeAsymptotics",
    "EscapeResult",
    "FluxIntegrals",
    "K_series",
    "QssDensity",
    "QssMoments",
    "QuadratureSettings",
    "TransitionDensity",
    "absorbed_density",
    "first_passage_density",
    "first_passage_laplace",
    "flux_time_integrals",
    "lemma_flux",
    "mean_escape_time",
    "mean_y",
    "potential",
    "q_function",
    "q_function_quadrature",
    "q_sum_series",
    "qss_moments",
    "qss_pdf",
    "sgn_mean_series",
    "sgn_autocorrelation_integral",
    "sliding_solution",
    "steady_state_K",
    "steady_state_pdf",
    "transition_pdf",
    "variance_y_exact_symmetric",
    "variance_y_leading",
    "x_mean_series",
    "xsgn_mean_series",
]
