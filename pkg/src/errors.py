"""
Exception hierarchy for the Direction Set Toolkit.

Input problems derive from InputValidationError (CLI exit code 2); numerical or
internal failures derive from ComputationError (CLI exit code 3).
"""

from typing import Any, Dict, Optional


class DirsetError(Exception):
    """Base class for all toolkit errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.details: Dict[str, Any] = details or {}


class InputValidationError(DirsetError, ValueError):
    """The caller supplied something the toolkit cannot work with."""


class ComputationError(DirsetError, RuntimeError):
    """A computation failed or produced a result that did not verify."""


class CoincidentPoints(InputValidationError):
    """Two points are closer than the coincidence threshold."""


class DimensionMismatch(InputValidationError):
    """Operands live in different dimensions."""


class TooFewPoints(InputValidationError):
    """The operation needs more (distinct) points than it was given."""


class EmptyInput(InputValidationError):
    """An operation that needs at least one direction received none."""


class BadTolerance(InputValidationError):
    """A tolerance or threshold is out of its admissible range."""


class BadSpec(InputValidationError):
    """A generator specification failed validation."""


class UnknownGenerator(InputValidationError):
    """No generator or function profile is registered under the given name."""


class UnsortedDomain(InputValidationError):
    """Sample abscissae are not strictly increasing."""


class LengthMismatch(InputValidationError):
    """Paired sequences have different lengths."""


class CoincidentBasePoints(InputValidationError):
    """Two base points of a graph coincide, so no secant slope exists."""


class MalformedInput(InputValidationError):
    """An input file could not be parsed."""


class NotAGraph(ComputationError):
    """The cloud fails the vertical line test for the requested pole."""


class GraphExtractionFailed(ComputationError):
    """A graph witness could not be certified where one must exist."""


class CapVerificationError(ComputationError):
    """A reported cap contains an input direction."""


class NetTooLarge(ComputationError):
    """The requested covering net exceeds the configured size limit."""
