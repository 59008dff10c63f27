"""Exception hierarchy shared by all modules."""


class FinslerError(Exception):
    """Base class for numerical failures raised by this package."""


class InvalidInputError(FinslerError, ValueError):
    """A point or vector lies outside the domain of the metric family."""


class IllConditionedError(FinslerError):
    """A numerical Hessian or linear solve is singular or indefinite."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ConvergenceError(FinslerError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class UnsupportedDomainError(FinslerError):
    """Raised when a routine needs ``convex_minimizing`` and the domain lacks it."""


class InvalidDomainError(FinslerError):
    pass


class DomainExitError(FinslerError):
    """A trajectory left the region where the metric is defined."""


class RunawayError(FinslerError):
    """A geodesic did not reach the boundary before ``t_max``."""


class ConjugatePointError(FinslerError):
    def __init__(self, message, r=None):
        super().__init__(message)
        self.r = r


class StepSizeError(FinslerError):
    pass


class ConfigError(ValueError):
    """Malformed, missing or out-of-range configuration entry."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
