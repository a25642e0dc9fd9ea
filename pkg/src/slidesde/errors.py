"""Exception and warning types shared across the package."""


class SlideSdeError(Exception):
    """Base class for all slidesde errors."""


class NonAttracting(SlideSdeError):
    """Raised when a_L <= 0 or a_R <= 0, so x = 0 is not an attracting sliding region."""


class BadNoise(SlideSdeError):
    """Raised for epsilon <= 0 or kappa < 0."""


class BadTime(SlideSdeError):
    """Raised when a density is evaluated at t <= 0."""


class QuadratureFailure(SlideSdeError):
    """Raised when adaptive quadrature cannot meet its tolerance within budget."""


class OutOfDomain(SlideSdeError):
    """Raised when an evaluation point lies outside the validity/truncation domain."""


class NotAttracting(SlideSdeError):
    """Raised by the Filippov convex combination when the two fields do not oppose."""


class OnManifold(SlideSdeError):
    """Raised when the off-manifold relay field is requested exactly on C^T x = 0."""


class SlidingExit(SlideSdeError):
    """Raised when the equivalent control leaves [-1, 1] and sliding is invalid."""


class StepFailure(SlideSdeError):
    """Raised when the adaptive integrator cannot meet its error control."""


class NoPeriodFound(SlideSdeError):
    """Raised when no periodic orbit is detected within the search horizon."""


class InsufficientOscillations(SlideSdeError):
    """Raised when fewer than three debounced sign changes were recorded."""


class TooFewSamples(SlideSdeError):
    """Raised when a confidence interval is requested from too small an ensemble."""


class EmptySample(SlideSdeError):
    """Raised by quantile summaries of an empty sample."""


class WindowViolation(UserWarning):
    """Warning: a time argument lies outside the validity window [eps^(1-delta), eps^-M]."""
