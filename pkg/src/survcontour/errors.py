"""Exception types shared across the package.

The split matters for the HTTP facade: data/request problems map to 400,
model-vs-data validation failures to 422, and nonconvergence is a job
failure rather than a request error.
"""


class SurvContourError(Exception):
    """Base class for all package errors."""


class DataError(SurvContourError):
    """Malformed input data or column roles (bad CSV, missing column, ...)."""


class ModelValidationError(SurvContourError):
    """A model family cannot be applied to the given data/roles."""


class NonconvergenceError(SurvContourError):
    """An iterative fit failed to converge."""

    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations
