"""Exception hierarchy shared by all polyham modules."""

from __future__ import annotations


class PolyhamError(Exception):
    """Base class for every error raised by polyham."""


class DimensionMismatch(PolyhamError, ValueError):
    pass


class IndexOutOfRange(PolyhamError, IndexError):
    pass


class DuplicateEntry(PolyhamError, ValueError):
    pass


class MemoryCapExceeded(PolyhamError, MemoryError):
    pass


class NonFiniteValue(PolyhamError, ValueError):
    pass


class SizeMismatch(PolyhamError, ValueError):
    pass


class OrderTooSmall(PolyhamError, ValueError):
    pass


class OddDimension(PolyhamError, ValueError):
    pass


class OrderCapExceeded(PolyhamError, ValueError):
    pass


class NotHamiltonian(PolyhamError, ValueError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class NotSupersymmetric(PolyhamError, ValueError):
    pass


class NotSymmetric(PolyhamError, ValueError):
    pass


class OddOrder(PolyhamError, ValueError):
    pass


class NotAnEquilibrium(PolyhamError, ValueError):
    pass


class NoConvergence(PolyhamError, RuntimeError):
    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class SingularJacobian(PolyhamError, RuntimeError):
    pass


class ParseError(PolyhamError, ValueError):
    """A text input could not be turned into tensors.

    ``span`` is a :class:`polyham.polyparse.SourceSpan` when the failure can
    be attributed to a location in the source.
    """

    def __init__(self, message: str, span=None):
        self.span = span
        if span is not None:
            message = f"{span}: {message}"
        super().__init__(message)


class PolySyntaxError(ParseError):
    pass


class ConstantTermNotAllowed(ParseError):
    pass


class DegreeZeroRHS(ParseError):
    pass


class DegreeTooLow(ParseError):
    pass


class UnknownVariable(ParseError):
    pass


class DimMismatch(ParseError):
    pass
