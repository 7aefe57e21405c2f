"""Exception types shared across the package."""


class SgwnError(Exception):
    """Base class for all package errors."""


class ValidationError(SgwnError, ValueError):
    """Input data violates a documented precondition."""


class CapacityError(SgwnError):
    """Problem size exceeds a configured limit."""


class ConfigurationError(SgwnError):
    """Objects were combined in an unsupported way."""


class NumericalError(SgwnError, ArithmeticError):
    """A numerical procedure failed. ``last_iterate`` holds partial state, if any."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class FormatError(SgwnError):
    """A serialized file is malformed."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset
