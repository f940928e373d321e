"""Exception types shared across the package."""


class LogDetLmiError(Exception):
    """Base class for all package errors."""


class ShapeError(LogDetLmiError):
    """Dimensions are missing, inconsistent or otherwise unusable."""


class ConeViolationError(LogDetLmiError):
    """A matrix failed a required PD/PSD membership."""

    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class EigenSolveError(LogDetLmiError):
    """The symmetric eigensolver did not converge."""


class BindingError(LogDetLmiError):
    """An expression references a variable the assignment does not bind."""


class SolveError(LogDetLmiError):
    """A solve that was expected to succeed did not."""


class ProblemFormatError(LogDetLmiError):
    """A problem file or constraint description failed to parse."""
