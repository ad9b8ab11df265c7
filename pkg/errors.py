"""
Exception hierarchy.
"""
from typing import Optional


class AtomkitError(Exception):
    """Base class for all toolkit errors."""


class UsageError(AtomkitError):
    """Invalid input supplied by the caller (bad flag, recipe or file)."""


class ShapeMismatchError(UsageError):
    """Operand shapes do not agree with the atomic set or operator."""


class NotSymmetricError(UsageError):
    """A matrix required to be symmetric is not."""


class NonPositiveWeightError(UsageError):
    """A weight required to be positive is not."""


class NotOrthonormalError(UsageError):
    """Columns required to be orthonormal are not."""


class BadDensityError(UsageError):
    """Sampling density outside (0, 1]."""


class BadFractionError(UsageError):
    """Sparsity fraction outside [0, 0.2]."""


class TooLargeError(UsageError):
    """Input exceeds the enumeration limits of an exhaustive routine."""


class NumericFailure(AtomkitError):
    """A numerical routine could not produce a trustworthy answer."""


class NonConvergenceError(NumericFailure):
    """Iterative kernel failed to reach its residual tolerance."""

    def __init__(self, message: str, iterations: Optional[int] = None):
        super().__init__(message)
        self.iterations = iterations


class UnboundedSupportError(NumericFailure):
    """The support function is +inf at the requested direction."""


class NotInConeError(NumericFailure):
    """The element lies outside the cone generated by the atoms."""


class BothInfiniteError(NumericFailure):
    """Alignment is undefined because a gauge or support value is infinite."""


class GaugeUnsupportedError(NumericFailure):
    """The descriptor cannot evaluate its gauge (e.g. non-invertible map)."""


class NoProjectorError(NumericFailure):
    """The descriptor has no Euclidean projector onto its hull."""


class InfeasibleError(NumericFailure):
    """No feasible split or representation exists."""


class EmptyFaceError(NumericFailure):
    """An exposed face holds no atoms."""


class ZeroMatrixError(NumericFailure):
    """Operation needs a nonzero matrix."""
