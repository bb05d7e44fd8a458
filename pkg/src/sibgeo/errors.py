"""Exception hierarchy shared by every layer of the package."""

from __future__ import annotations


class SibgeoError(Exception):
    """Base class for all package errors."""


class ExprError(SibgeoError):
    """Raised for problems with expression source text."""


class ExprSyntaxError(ExprError):
    """Malformed expression; ``offset`` is the UTF-8 byte offset of the problem."""

    def __init__(self, message: str, offset: int, source: str = ""):
        self.message = message
        self.offset = offset
        self.source = source
        super().__init__(f"{message} (at byte {offset})")


class UnknownIdentifier(ExprSyntaxError):
    """A name that is neither a coordinate, a known function nor a constant."""


class ArityError(ExprSyntaxError):
    """A function called with the wrong number of arguments."""


class DomainError(SibgeoError, ArithmeticError):
    """Evaluation left the real domain of an expression (1/0, ln of x <= 0, ...)."""


class DimensionMismatch(SibgeoError, ValueError):
    pass


class SingularMetric(SibgeoError):
    """The metric matrix is (numerically) not invertible at a point."""


class SignatureError(SibgeoError):
    pass


class DegeneratePlane(SibgeoError, ValueError):
    pass


class NotUnit(SibgeoError):
    """The vector field does not have unit length; carries the worst offender."""

    def __init__(self, message: str, point=None, value: float | None = None):
        self.point = point
        self.value = value
        super().__init__(message)


class NotSymmetric(SibgeoError):
    pass


class TPropertiesViolated(SibgeoError):
    """The unit field lacks geodesic flow or an integrable normal bundle."""


class BadParameters(SibgeoError, ValueError):
    pass


class Big3Violated(SibgeoError):
    pass


class ConfigError(SibgeoError):
    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")
