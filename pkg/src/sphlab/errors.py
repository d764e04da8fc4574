"""Exception types shared across the package."""


class SphlabError(Exception):
    """Base class for all package errors."""


class DomainError(SphlabError):
    """An argument lies outside the mathematical domain of the operation."""


class EmptySphere(SphlabError):
    """The requested lattice sphere contains no points."""


class CapExceeded(SphlabError):
    """Sphere enumeration would exceed the caller-supplied point cap."""


class QuadratureFailure(SphlabError):
    """Adaptive quadrature did not reach the requested tolerance."""


class RegimeViolation(SphlabError):
    """A (dimension, squared-radius) pair violates a survey regime precondition."""


class RangeError(SphlabError):
    """An index parameter lies outside its admissible range."""


class InfeasibleScale(SphlabError):
    """A cost estimate exceeds the configured computational budget."""


class IndivisibleSide(SphlabError):
    """The sampling modulus q does not divide the torus side L."""


class OddSide(SphlabError):
    """Sign-flip modulation needs an even torus side (the half-shift must be a lattice frequency)."""


class NonHermitianInput(SphlabError):
    """A matrix field flagged Hermitian fails the Hermitian check."""


class SolverStall(SphlabError):
    """The majorant solver exhausted its iteration budget before reaching tolerance."""
