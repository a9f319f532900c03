"""Exception hierarchy.

Every domain error derives from :class:`FluxRiverError`, which is a
``ValueError`` so callers that only care about "bad input" can catch that.
"""

from __future__ import annotations


class FluxRiverError(ValueError):
    """Base class for all domain errors raised by this package."""


class ParseError(FluxRiverError):
    """An input document could not be turned into a valid domain object.

    Attributes:
        line: 1-based line number of the offending row (header is line 1),
            or ``None`` when the problem is not tied to a single row.
        value: the offending value, as text.
    """

    def __init__(self, message: str, line: int | None = None, value: object = None):
        self.line = line
        self.value = value
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{type(self).__name__}: {where}{message}")


class MalformedRow(ParseError):
    pass


class MissingCell(ParseError):
    pass


class DuplicateCell(ParseError):
    pass


class UnknownMood(ParseError):
    pass


class UnknownModel(ParseError):
    pass


class WrongColumnCount(ParseError):
    pass


class BadAccuracyRange(ParseError):
    pass


class NegativeCount(ParseError):
    pass


class BadRange(ParseError):
    pass


class InvariantViolation(FluxRiverError):
    """A constructor was handed data that breaks a type invariant."""


class EmptyList(FluxRiverError):
    pass


class WindowCountMismatch(FluxRiverError):
    pass


class LTooLarge(FluxRiverError):
    pass


class ZeroTotalStep(FluxRiverError):
    pass


class DimensionMismatch(FluxRiverError):
    pass


class EmptyGeometry(FluxRiverError):
    pass


class ScaleMismatch(FluxRiverError):
    pass
