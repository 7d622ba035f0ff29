"""
cspline Exception Classes

Custom exception classes for cspline error handling.
"""

from typing import Optional


class CSplineError(Exception):
    """Base exception class for cspline errors."""
    pass


class ConfigurationError(CSplineError):
    """Raised when there are configuration-related errors."""
    pass


class ShapeError(CSplineError):
    """Raised when algebra specs, block shapes or module ranks do not match."""
    pass


class ValidationError(CSplineError):
    """Raised when input data violates a structural invariant (e.g. A-linearity)."""
    pass


class DomainError(CSplineError):
    """Raised when an operation is called outside its precondition."""
    pass


class ParseError(CSplineError):
    """Raised when a problem file cannot be loaded."""

    def __init__(self, message: str, location: Optional[str] = None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class OutputError(CSplineError):
    """Raised when there are report generation errors."""
    pass
