"""
Exception classes for kackit.
"""

from typing import Optional


class KacKitError(Exception):
    """Base exception for all kackit errors."""

    def __init__(self, message: str, cause: Optional[Exception] = None):
        super().__init__(message)
        self.cause = cause


class ConfigurationError(KacKitError):
    """Raised when configuration is invalid."""

    pass


class InvalidInput(KacKitError):
    """Raised when an input object violates its shape or value invariants."""

    def __init__(self, message: str, field_path: str = "", cause: Optional[Exception] = None):
        super().__init__(f"{field_path}: {message}" if field_path else message, cause)
        self.field_path = field_path


class NotAHomomorphism(KacKitError):
    """Raised when a map fails multiplicativity or *-preservation."""

    pass


class NotUnital(KacKitError):
    """Raised when a map does not send the unit to the unit."""

    pass


class DisconnectedInclusion(KacKitError):
    """Raised when an inclusion's Bratteli graph is disconnected."""

    pass


class SingularGram(KacKitError):
    """Raised when a Gram matrix is numerically singular."""

    pass


class NotSemisimple(KacKitError):
    """Raised when the trace form of a presentation is degenerate."""

    pass


class NumericalDegeneracy(KacKitError):
    """Raised when a randomized splitting keeps failing at the working tolerance."""

    pass


class NotFlat(KacKitError):
    """Raised when a unitary has an entry of modulus other than 1/sqrt(n)."""

    pass


class NotUnitary(KacKitError):
    """Raised when a matrix is not unitary."""

    pass


class UnsupportedAlgebraShape(KacKitError):
    """Raised when no canonical construction exists for an algebra's block structure."""

    pass


class NotUnitaryONB(KacKitError):
    """Raised when a basis is not a unitary orthonormal basis."""

    pass


class NonMarkovTrace(KacKitError):
    """Raised when a construction requires the Markov trace and got another one."""

    pass


class IncompatibleTower(KacKitError):
    """Raised when two inclusions cannot be stacked."""

    pass


class InvalidSquare(InvalidInput):
    """Raised when the four corners of a square do not compose consistently."""

    pass


class DegenerateSquare(KacKitError):
    """Raised when a commuting square is degenerate."""

    pass


class NotCommutingSquare(KacKitError):
    """Raised when the conditional expectations of a square do not commute."""

    pass


class InputNotBasis(KacKitError):
    """Raised when a candidate basis fails verification."""

    pass


class InvalidGroupoid(InvalidInput):
    """Raised when groupoid data violates the groupoid axioms."""

    pass


class ActionNotVerified(KacKitError):
    """Raised when an action fails its axiom suite."""

    pass


class QuotientRankInstability(KacKitError):
    """Raised when the rank of a relation span is ambiguous at tolerance."""

    pass
