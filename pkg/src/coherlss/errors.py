"""Exception types shared across the package."""


class CoherlssError(Exception):
    """Base class for all package-specific failures."""


class InvalidArgumentError(CoherlssError, ValueError):
    """An argument violates a documented precondition."""


class ConfigError(InvalidArgumentError):
    """A run configuration is malformed or inconsistent."""


class DomainError(CoherlssError, ValueError):
    """A function was evaluated outside its domain.

    Carries the offending value in ``value`` when known.
    """

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class DegenerateSpectrumError(CoherlssError, RuntimeError):
    """A spectral matrix has a nonpositive diagonal entry."""


class DegenerateEstimateError(CoherlssError, RuntimeError):
    """A data-driven estimate collapsed (e.g. every lag-window density <= 0)."""


class NumericalFailureError(CoherlssError, RuntimeError):
    """A numerical routine failed to meet its accuracy contract."""


class SingularPointError(NumericalFailureError):
    """A transform was evaluated at (numerically) a pole."""
