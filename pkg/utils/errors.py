"""
Error hierarchy for the rainbow chain laboratory

Every failure raised by the library derives from RainbowError. Each class
carries the process exit code the command-line front end reports for it.
"""

from typing import Any, Dict, Optional


class RainbowError(Exception):
    """
    Base class for all laboratory errors

    Args:
        message: Human readable description
        details: JSON-serialisable diagnostic payload
    """

    exit_code = 2

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": type(self).__name__,
            "message": self.message,
            "details": self.details,
        }


class InvalidParameterError(RainbowError, ValueError):
    """A precondition on an input was violated."""

    exit_code = 1


class OracleCapError(InvalidParameterError):
    """Brute-force Fock space requested beyond its hard size cap."""


class UnderflowGuardError(RainbowError):
    """Exponential evaluation would under- or overflow double precision."""

    exit_code = 3


class NumericalError(RainbowError):
    """Base class for numerical failures."""

    exit_code = 2


class ConvergenceError(NumericalError):
    """Eigensolver failed to converge."""


class FermiDegeneracyError(NumericalError):
    """The two single-particle levels around the Fermi level cannot be separated."""


class NumericalConsistencyError(NumericalError):
    """A computed quantity left its mathematically allowed window."""


class DegenerateGroundStateError(NumericalError):
    """The many-body ground space of the oracle Hamiltonian is degenerate."""


class GammaPoleError(NumericalError):
    """Gamma function evaluated at a pole."""


class FitError(RainbowError):
    """A scaling-law fit could not be performed."""

    exit_code = 2


class RankDeficiencyError(FitError):
    """The design matrix of a fit does not identify every coefficient."""
