"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RangeError(ValueError):
    """A target value lies outside the attainable range (e.g. inversion)."""


class PreconditionError(ValueError):
    """A structural precondition on the inputs is violated."""


class SingularityError(ArithmeticError):
    """The integrand is non-integrable at the evaluation point."""


class AccuracyError(RuntimeError):
    """The quadrature budget was exhausted before reaching tolerance.

    Carries the best value computed so far in ``value`` and its error
    estimate in ``est_error``.
    """

    def __init__(self, message, value=None, est_error=None):
        super().__init__(message)
        self.value = value
        self.est_error = est_error


class ConstructionError(RuntimeError):
    """A profile construction search failed; the message carries diagnostics."""


class ConsistencyError(RuntimeError):
    """Data fed to an operation contradicts what the pipeline guarantees."""
