"""Exception types shared across the package."""


class StreamContainersError(Exception):
    """Base class for all errors raised by this package."""


class TurtleParseError(StreamContainersError):
    """Syntax or resolution error in a Turtle document."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


class TimestampError(StreamContainersError, ValueError):
    """Malformed xsd:dateTimeStamp lexical form or missing timezone."""


class TimestampRangeError(StreamContainersError, OverflowError):
    """Instant outside the representable range (years 1..9999)."""


class DurationError(StreamContainersError, ValueError):
    """Malformed xsd:duration, or year/month components present."""


class WindowSpecError(StreamContainersError, ValueError):
    """Invalid window description in a container document."""


class TransportError(StreamContainersError):
    """Request could not be delivered or no response was received."""


class FetchError(StreamContainersError):
    """Container retrieval failed (non-200 response or missing window)."""


class EmitError(StreamContainersError):
    """Downstream container rejected an emitted element."""
