"""Exception hierarchy shared by all modules."""


class RicciCompareError(Exception):
    """Base class for every error raised by this package."""


class NumericalFailure(RicciCompareError):
    """A solver or quadrature could not meet its tolerance."""


class DomainError(RicciCompareError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class NonFiniteKappa(NumericalFailure):
    pass


class StepUnderflow(NumericalFailure):
    pass


class DomainExceeded(DomainError):
    """``s >= pi / sqrt(kappa)`` for a positive constant curvature."""


class OutOfDomain(DomainError):
    pass


class OutOfRange(DomainError):
    pass


class InvalidDimension(DomainError):
    pass


class PoleSingularity(DomainError):
    """Evaluation requested exactly at the pole, where the quantity blows up."""


class ReversedBounds(DomainError):
    pass


class DeltaExceeded(DomainError):
    """The re-parametrized distance left the interval where the model is defined."""


class EmptyGrid(DomainError):
    pass


class NotSymmetric(DomainError):
    pass


class HorizonTooShort(DomainError):
    pass


class PoleDefect(RicciCompareError):
    pass


class EqualityViolated(RicciCompareError):
    def __init__(self, which, r, deviation):
        super().__init__(f"equality ({which}) violated at r={r:.6g}, deviation {deviation:.3e}")
        self.which = which
        self.r = r
        self.deviation = deviation


class ConfigError(RicciCompareError):
    def __init__(self, message, field=None):
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field
