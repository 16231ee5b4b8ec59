"""Exception types shared across the package."""


class IWSError(Exception):
    """Base class for package errors."""


class MalformedRecordError(IWSError):
    """A corpus record failed validation; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ConfigurationError(IWSError):
    """Invalid configuration or arguments that cannot produce a result."""


class ValidationError(IWSError):
    """Inputs violate a documented precondition."""


class ProtocolError(IWSError):
    """A session operation was called out of order."""


class SessionComplete(IWSError):
    """Raised by next_query once the iteration budget is exhausted."""


class InsufficientFeedbackError(IWSError):
    """The query dataset lacks both a useful and a not-useful example."""
