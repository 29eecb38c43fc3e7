"""Exception and warning classes raised by symcap."""


class SymcapError(Exception):
    """Base class for all symcap errors."""


class ValidationError(SymcapError, ValueError):
    """Input failed a structural check (shape, symmetry, definiteness, file schema)."""


class InvalidDimensionError(ValidationError):
    pass


class NotSymmetricError(ValidationError):
    pass


class NotHermitianError(ValidationError):
    pass


class DefinitenessError(ValidationError):
    """Matrix expected to be positive-definite is not.

    Attributes:
        eigenvalue: the offending (smallest) eigenvalue.
    """

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class GridError(ValidationError):
    """Grid spec mismatch, non power-of-two size, or a resampling that leaves the grid."""


class NumericalError(SymcapError, ArithmeticError):
    """A computation ran but could not meet its accuracy contract."""


class DiagonalizationError(NumericalError):
    pass


class ConditioningError(NumericalError):
    pass


class ConvexityError(NumericalError):
    pass


class ApproximationError(NumericalError):
    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


class InternalConsistencyError(NumericalError):
    """Two mathematically equivalent tests disagreed beyond tolerance."""


class AliasingWarning(UserWarning):
    """Sampled function is not negligible at the grid boundary."""


class ConditioningWarning(UserWarning):
    pass


class SingularMatrixError(ValidationError):
    pass
