"""Exception hierarchy.

Input problems derive from :class:`ValidationError` (a ``ValueError``) and
map to CLI exit code 2; numerical failures derive from
:class:`NumericalError` and map to exit code 3.
"""

from __future__ import annotations


class OrliczError(Exception):
    """Base class for all package errors."""


class ValidationError(OrliczError, ValueError):
    pass


class NumericalError(OrliczError, ArithmeticError):
    pass


# distributions
class NonPositiveSupport(ValidationError):
    pass


class WeightSumMismatch(ValidationError):
    pass


class NegativeWeight(ValidationError):
    pass


class InvalidParams(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


# Orlicz functions
class UnknownFunction(ValidationError):
    pass


class ParamOutOfRange(ValidationError):
    pass


class DomainError(ValidationError):
    pass


# premia, scores
class NonPositiveK(ValidationError):
    pass


class NonPositiveX(ValidationError):
    pass


class NonPositiveArgs(ValidationError):
    pass


class BracketFailure(NumericalError):
    def __init__(self, message: str, lo: float, hi: float, g_lo: float, g_hi: float):
        super().__init__(f"{message}: g({lo!r})={g_lo!r}, g({hi!r})={g_hi!r}")
        self.lo, self.hi, self.g_lo, self.g_hi = lo, hi, g_lo, g_hi


class NonConvergence(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class ConsistencyViolation(NumericalError):
    def __init__(self, message: str, x: float):
        super().__init__(f"{message} (at x={x!r})")
        self.x = x


# OR risk measures
class InnerEvaluationFailure(NumericalError):
    pass


class PropertyViolation(NumericalError):
    def __init__(self, prop: str, witness: dict):
        super().__init__(f"property {prop!r} violated: {witness}")
        self.prop = prop
        self.witness = witness
