"""Exception hierarchy shared across the toolkit.

Two broad families matter to callers: data that fails domain validation
(ValidationError and friends, CLI exit code 1) and documents or files that
cannot be read at all (ParseError / FormatError, CLI exit code 2).
"""


class TabsynthError(Exception):
    """Base class for all toolkit errors."""


class ParseError(TabsynthError):
    """A text document could not be parsed; message carries line/field info."""


class FormatError(TabsynthError):
    """A binary or structured file is malformed (bad header, truncation...)."""


class ValidationError(TabsynthError):
    """Well-formed input that violates a domain rule."""


class CoverageError(ValidationError):
    """A required (string, fret) position has no tone sample."""

    def __init__(self, positions, message=None):
        self.positions = sorted(positions)
        if message is None:
            listed = ", ".join(f"(string {s}, fret {f})" for s, f in self.positions)
            message = f"no bank coverage for: {listed}"
        super().__init__(message)


class GridMismatchError(ValidationError):
    """Two frame grids (hop / sample rate / length) disagree."""


class InsufficientDataError(ValidationError):
    """Fewer values than the statistic requires."""


class SampleTooSmallError(InsufficientDataError):
    """Sample below the minimum size of a normality test."""


class DegenerateDataError(ValidationError):
    """Zero-variance data for which the statistic is undefined."""
