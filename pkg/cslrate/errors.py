"""
Exception hierarchy for cslrate.

Every error raised on purpose by the library derives from CslRateError so
that callers (and the command-line harness) can map failures to exit codes.
Errors describing bad argument values also derive from ValueError.
"""

from typing import Optional


class CslRateError(Exception):
    """Base class for all cslrate errors."""


class InvalidParameterError(CslRateError, ValueError):
    """A physical constant, dimension or setting is out of its allowed range."""


class DomainError(CslRateError, ValueError):
    """A function argument lies outside the function's domain."""


class RegimeError(CslRateError):
    """The requested computation is not defined for this configuration."""


class InvalidGeometryError(RegimeError):
    """The operation does not support the given geometry kind."""


class UnsupportedDisplacementError(RegimeError):
    """The displacement direction is not supported for this geometry."""


class DegenerateFitError(RegimeError):
    """Too few minima were found to fit a line through them."""


class UnsupportedOrderError(CslRateError):
    """A derivative or expansion order beyond the supported cap was requested."""


class QuadratureError(CslRateError):
    """Adaptive quadrature did not reach the requested tolerance."""


class SizeLimitError(CslRateError):
    """A brute-force evaluation was asked for more sites than its cost guard allows."""


class ScenarioError(CslRateError):
    """
    A scenario or stack file violates the input schema.

    Attributes:
        field (Optional[str]): Dotted path of the offending field, if known
        line (Optional[int]): Line number for JSON syntax errors
    """

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")
        self.field = field
        self.line = line
