"""Exception types shared across the package."""


class CurvflowError(Exception):
    """Base class for all package errors."""


class EvaluationDomainError(CurvflowError):
    """A field was evaluated outside its smooth domain (non-finite value,
    division by a vanishing quantity, t outside (0, T], ...)."""


class DegenerateMetricError(CurvflowError):
    """Metric components are singular (or numerically indistinguishable
    from singular) at the evaluation point."""


class ExtinctionError(CurvflowError):
    """A closed-form flow was queried at or past its extinction time."""

    def __init__(self, message: str, extinction_time: float):
        super().__init__(message)
        self.extinction_time = extinction_time


class StepSizeError(CurvflowError):
    """Explicit time step violates the stability bound of the scheme."""


class UnsupportedRankError(CurvflowError):
    """Tensor rank outside the supported range."""


class PreconditionError(CurvflowError):
    """A documented precondition of an operation does not hold."""


class UnsupportedConfigurationError(CurvflowError):
    """The requested check is only defined for a restricted configuration
    (e.g. homogeneous base flows)."""


class UsageError(CurvflowError):
    """Malformed configuration file or command line."""
