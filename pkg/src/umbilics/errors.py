"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class UmbilicsError(Exception):
    """Base class for every error raised by this package."""


class DomainError(UmbilicsError, ValueError):
    """A point lies outside the region where a field is defined."""


class NonFiniteError(UmbilicsError, ArithmeticError):
    """A derivative entry overflowed or became NaN."""


class UmbilicError(UmbilicsError):
    """The principal direction is requested at an umbilic."""


class ZeroOnCurveError(UmbilicsError):
    """A vector field vanishes (numerically) on the integration curve."""


class UmbilicOnCurveError(UmbilicError, ZeroOnCurveError):
    """The curve passes through an umbilic, so the line field is undefined there."""


class EquiDiagonalError(ZeroOnCurveError):
    """The Hessian is a multiple of the identity on the curve."""


class TangentZeroError(UmbilicsError):
    """A zero of the first identifier along the curve is not transversal."""


class NoConvergence(UmbilicsError, RuntimeError):
    """An iterative procedure exhausted its refinement or iteration budget."""


class ParseError(UmbilicsError, ValueError):
    """A surface or curve description could not be parsed."""
