"""Exception hierarchy shared by every module."""


class HtodaError(Exception):
    """Base class for all library errors."""


class DomainError(HtodaError, ValueError):
    """Argument lies outside (or within 1e-10 of the edge of) a function's domain."""


class ParameterError(HtodaError, ValueError):
    """Invalid construction parameter (non-positive mass, 2*beta <= 1, ...)."""


class MonotonicityError(ParameterError):
    """A user-supplied phi is not positive and increasing on the sample grid."""


class ConvergenceError(HtodaError, RuntimeError):
    """Root finder exhausted its iteration budget."""


class QuadratureError(HtodaError, RuntimeError):
    """Adaptive quadrature could not reach the requested tolerance."""


class ConvexityError(HtodaError, ValueError):
    """A Hessian that must be positive definite is not."""


class HypothesisError(HtodaError, ValueError):
    """A verification was requested on a system that violates its hypotheses."""


class GridError(HtodaError, ValueError):
    """Too few samples for the requested finite-difference stencil."""
