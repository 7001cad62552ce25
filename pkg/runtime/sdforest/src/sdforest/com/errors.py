"""
Exception hierarchy of the sdforest runtime.

Every error carries the process exit code the CLI reports for it:
2 for input validation problems, 3 for numerical failures.
"""

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


class SDForestError(Exception):
    """
    Base error for all sdforest exceptions.
    """
    exit_code = EXIT_INPUT


# ------------------------
# Input validation
# ------------------------


class InputValidationError(SDForestError):
    """
    Raised when user supplied data or configuration is unusable.
    """
    exit_code = EXIT_INPUT


class NonFiniteInputError(InputValidationError):
    """
    Raised when a matrix or vector contains NaN or infinite entries.
    """


class ShapeError(InputValidationError):
    """
    Raised when array dimensions do not match.
    """


class ConfigError(InputValidationError):
    """
    Raised when a fitting parameter is outside its admissible range.
    """


class RangeError(InputValidationError):
    """
    Raised when a count exceeds what the data supports (e.g. q_remove > rank).
    """


class ZeroVarianceError(InputValidationError):
    """
    Raised when column standardization meets a constant column.
    """

    def __init__(self, column: int, name: str | None = None):
        self.column = column
        self.name = name
        label = f"'{name}' (index {column})" if name else f"index {column}"
        super().__init__(f"Column {label} has zero variance and cannot be standardized.")


class DataFormatError(InputValidationError):
    """
    Raised when a CSV table cannot be read as numeric data.
    """


# ------------------------
# Numerical failures
# ------------------------


class NumericalError(SDForestError):
    """
    Raised when a computation cannot produce a valid result.
    """
    exit_code = EXIT_NUMERICAL


class DegenerateRankError(NumericalError):
    """
    Raised when a matrix has too few non-zero singular values.
    """


class ConsistencyError(NumericalError):
    """
    Raised when an internal invariant is violated, e.g. a stale split candidate.
    """


# ------------------------
# Persistence
# ------------------------


class ModelStoreError(SDForestError):
    """
    Base error for model persistence.
    """
    exit_code = EXIT_INPUT


class ModelLoadError(ModelStoreError):
    """
    Raised when a serialized model cannot be read or has an unknown version.
    """


class ModelSaveError(ModelStoreError):
    """
    Raised when a model cannot be written.
    """
