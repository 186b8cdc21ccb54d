# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
Exception hierarchy for POP-CNN

Every validation failure in the package is raised through ``throw`` so that
callers (and the CLI exit-code mapping) only need to know these classes.
"""

from typing import Any, Optional, Type


class PopCNNError(Exception):
    """Base class for all errors raised by the pipeline"""


class ArgumentError(PopCNNError, ValueError):
    """An argument violates an operation's precondition"""


class RangeError(PopCNNError, IndexError):
    """An index or length lies outside the valid range"""


class ConfigurationError(PopCNNError, ValueError):
    """A configuration value is missing, unknown or inconsistent"""


class DegenerateInputError(PopCNNError, ValueError):
    """Input is well-formed but carries no usable information (e.g. constant)"""


class ShapeMismatchError(ArgumentError):
    """
    Two shapes that must agree do not

    Carries the name of the offending dimension so diagnostics can point at it.
    """

    def __init__(
        self,
        message: str,
        dimension: Optional[str] = None,
        expected: Any = None,
        actual: Any = None
    ):
        super().__init__(message)
        self.dimension = dimension
        self.expected = expected
        self.actual = actual


def throw(message: str, exc: Type[PopCNNError] = ArgumentError, **kwargs) -> None:
    """
    Raise ``exc`` with ``message``

    Args:
        message: Human readable description of the failed rule
        exc: Exception class to raise
        **kwargs: Extra keyword arguments for the exception (ShapeMismatchError)
    """
    raise exc(message, **kwargs)


def check_shape(name: str, expected: Any, actual: Any) -> None:
    """Raise ShapeMismatchError naming ``name`` when ``expected != actual``"""
    if expected != actual:
        throw(
            "{0} mismatch: expected {1}, got {2}".format(name, expected, actual),
            ShapeMismatchError,
            dimension=name,
            expected=expected,
            actual=actual
        )
