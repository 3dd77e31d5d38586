"""Shared exception types."""


class TransformAtlasError(Exception):
    """Base class for all package errors."""


class DomainError(TransformAtlasError, ValueError):
    """Arguments outside the operation's stated domain."""


class PoleError(DomainError):
    """Evaluation requested exactly at a pole."""


class RangeOverflowError(TransformAtlasError, ArithmeticError):
    """An intermediate quantity exceeds double range; no value is returned."""


class ConvergenceError(TransformAtlasError, ArithmeticError):
    """An iterative scheme exhausted its budget without meeting tolerance."""
