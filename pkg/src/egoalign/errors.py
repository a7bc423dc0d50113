"""Exception hierarchy.

Parsers raise subclasses of :class:`ParseError` (which carry a 1-based line
number when one applies); the MP4 walker raises :class:`ProbeError`
subclasses. Validation never raises; problems become findings instead.
"""

from __future__ import annotations


class EgoAlignError(Exception):
    """Base class for every error raised by this package."""


class ParseError(EgoAlignError, ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", field {column}"
            where += ": "
        super().__init__(where + message)


# session log
class MissingHeader(ParseError):
    pass


class MalformedBlock(ParseError):
    pass


class BadInteger(ParseError):
    pass


class DialectMismatch(EgoAlignError, ValueError):
    pass


# poses file
class FieldCount(ParseError):
    pass


class BadNumber(ParseError):
    pass


class NonMonotonicIdx(ParseError):
    pass


class DecreasingTime(ParseError):
    pass


class InvariantViolation(EgoAlignError, ValueError):
    pass


# container probing
class ProbeError(EgoAlignError, ValueError):
    pass


class Truncated(ProbeError):
    pass


class ZeroSize(ProbeError):
    pass


class SizeOverrun(ProbeError):
    pass


class NoMoov(ProbeError):
    pass


class FragmentedUnsupported(NoMoov):
    pass


class BadVersion(ProbeError):
    pass


class MissingBox(ProbeError):
    pass


# session folders
class MissingLog(EgoAlignError, FileNotFoundError):
    pass


class UnreadableDir(EgoAlignError, OSError):
    pass


class DuplicateStreamName(EgoAlignError, ValueError):
    pass


class EmptyInput(EgoAlignError, ValueError):
    pass


class UnknownProfile(EgoAlignError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown profile"


class IoFailure(EgoAlignError, OSError):
    pass


# clock fitting
class InsufficientAnchors(EgoAlignError, ValueError):
    pass


class DegenerateTimes(EgoAlignError, ValueError):
    pass


class StreamMismatch(EgoAlignError, ValueError):
    pass


class EmptyAnchors(EgoAlignError, ValueError):
    pass


# alignment
class EmptyOverlap(EgoAlignError, ValueError):
    pass


class NoStreams(EgoAlignError, ValueError):
    pass


class OutOfRange(EgoAlignError, ValueError):
    pass


class EmptyTrack(EgoAlignError, ValueError):
    pass


class NonUnitInput(EgoAlignError, ValueError):
    pass
