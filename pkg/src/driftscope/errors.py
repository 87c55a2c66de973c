"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: UsageError -> 1, DataError (and
subclasses) -> 2, NumericalError -> 3.
"""


class DriftscopeError(Exception):
    """Base class for all toolkit errors."""


class UsageError(DriftscopeError):
    """Bad invocation: unknown metric names, invalid option values."""


class DataError(DriftscopeError):
    """Invalid or internally inconsistent input data."""


class ParseError(DataError):
    """A record that is not syntactically valid JSON."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(DataError):
    """A syntactically valid record that violates the corpus schema."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        if field is not None:
            message = f"field '{field}': {message}"
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.field = field
        self.line = line


class ProfileError(DataError):
    """Unreadable, truncated, or version-incompatible profile file."""


class ModelError(DataError):
    """Unreadable, truncated, or version-incompatible model file."""


class SingleClassError(DataError):
    """An operation that needs both label classes saw only one."""


class MetricUnavailable(DriftscopeError):
    """A drift metric cannot be computed for this example.

    Carries one of the reason codes from `driftscope.metrics`; callers
    that score in batch record the code instead of propagating.
    """

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class NumericalError(DriftscopeError):
    """Numerical failure during fitting or prediction."""
