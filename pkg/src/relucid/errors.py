"""Exception hierarchy shared by every module."""


class RelucidError(Exception):
    """Base class for toolkit errors."""


class ShapeError(RelucidError, ValueError):
    """Array or vector dimensions do not match the model or rule set."""


class ParseError(RelucidError, ValueError):
    """A document or data file could not be parsed."""


class FormatError(ParseError):
    """A data file is structurally malformed (e.g. ragged rows)."""


class CapacityError(RelucidError):
    """Exhaustive pattern enumeration would exceed the configured bit cap."""


class TrainingError(RelucidError):
    """Training cannot start with the given data or configuration."""


class DivergenceError(TrainingError):
    """Training produced a non-finite loss."""


class InvariantViolation(RelucidError, AssertionError):
    """An internal invariant failed; signals a bug in extraction."""


class NumericalFailure(RelucidError):
    """The LP solver hit its iteration cap."""
