"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so each class names a failure family
rather than a call site.
"""


class MaiccError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(MaiccError, ValueError):
    """Malformed input: wrong shapes, bad spec documents, unknown names."""


class ShapeError(ValidationError):
    """Array dimensions are inconsistent with each other."""


class NumericError(MaiccError, ArithmeticError):
    """A numerical precondition failed (singularity, degrees of freedom)."""


class CovarianceError(NumericError):
    """A matrix that must be symmetric positive definite is not."""


class SingularityError(NumericError):
    """A matrix is numerically rank deficient.

    Parameters
    ----------
    message : str
        Human readable description.
    smallest_singular_value : float, optional
        The offending singular value, when one was computed.
    """

    def __init__(self, message, smallest_singular_value=None):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value


class DegreesOfFreedomError(NumericError):
    """Sample size too small for the requested quantity (e.g. n - p - q - 1 <= 0)."""
