"""
exceptions.py

Error types raised by the toolkit and the exit codes the CLI maps them to.
Domain errors derive from `ValueError` so existing `except ValueError`
handlers keep working.
"""

from enum import IntEnum


class ExitCode(IntEnum):
    SUCCESS = 0
    INVARIANT_VIOLATION = 2
    IO_ERROR = 3
    CONFIG_ERROR = 4


class NonPhysicalStateError(ValueError):
    """A matrix fails the density-matrix or distribution checks."""


class DimensionMismatchError(ValueError):
    """Operands act on Hilbert spaces of different dimension."""


class DegenerateInputError(ValueError):
    """Input is well-formed but makes the requested construction vacuous."""


class QuadratureError(ValueError):
    """Overlap integrals did not converge under node doubling."""


class TruncationError(ValueError):
    """Too much probability mass falls outside the truncated mode basis."""

    def __init__(self, message: str, theta: float):
        super().__init__(message)
        self.theta = theta


class ImpossibleObservationError(ValueError):
    """An outcome with zero marginal probability was fed to a Bayes update."""


class SupportMismatchError(ValueError):
    """support(rho) is not contained in support(sigma)."""


class InvariantViolationError(AssertionError):
    """A verification run found a residual above tolerance."""
