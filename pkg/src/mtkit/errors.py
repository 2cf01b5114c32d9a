"""Exception types shared across the toolkit.

Everything raised on malformed or inconsistent input data derives from
:class:`DataError`, so callers (notably the CLI) can distinguish data
problems from programming errors.
"""

from __future__ import annotations


class DataError(Exception):
    """Base class for errors caused by invalid input data."""


class ParseError(DataError):
    """A line-oriented input could not be parsed.

    Carries the 1-based line number when known.
    """

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class MissingFeatureError(DataError):
    """A hypothesis lacks a feature required by the active weight vector."""


class AlignmentError(DataError):
    """A subword sequence does not re-compose into its token sequence."""

    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"position {position}: {message}")


class SeparatorCountError(DataError):
    """A joined text splits into a different number of parts than expected."""

    def __init__(self, expected: int, actual: int, text: str = ""):
        self.expected = expected
        self.actual = actual
        snippet = f": {text[:60]!r}" if text else ""
        super().__init__(
            f"expected {expected} sentence(s), found {actual}{snippet}"
        )
