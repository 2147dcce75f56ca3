"""Exception types shared across the package."""


class McartestError(Exception):
    """Base class for all package-specific errors."""


class DataFormatError(McartestError):
    """Raised when an input file cannot be parsed into a dataset."""


class DegenerateDataError(McartestError):
    """Raised when data are structurally unusable for a requested statistic.

    Examples: no incomplete columns, a response column without variation,
    a single missingness pattern where at least two are required.
    """


class SingularMatrixError(McartestError):
    """Raised when a matrix required to be positive definite is not.

    Carries the offending eigenvalue so callers can report how close to
    singular the estimate was.
    """

    def __init__(self, message: str, eigenvalue: float | None = None):
        super().__init__(message)
        self.eigenvalue = eigenvalue
