"""
Custom exceptions for Phononet.

All exceptions inherit from PhononetError for easier catching.
Each exception includes a message and optional details dict.

Three families map onto CLI exit codes:
- ConfigError (2): input files and expressions that do not parse
- PhysicsError (3): physics or validation failures
- ExportError (4): output could not be written
"""


class PhononetError(Exception):
    """Base exception for all Phononet errors."""

    exit_code = 1

    def __init__(self, message: str, details: dict = None):
        """
        Initialize base exception.

        Args:
            message: Human-readable error message
            details: Optional dict with additional context (offending field, values)
        """
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self) -> str:
        """String representation with details if available."""
        if self.details:
            details_str = ", ".join(f"{k}={v}" for k, v in self.details.items())
            return f"{self.message} ({details_str})"
        return self.message


# ==================== Input (exit 2) ====================


class ConfigError(PhononetError):
    """Configuration or measurement file could not be parsed."""

    exit_code = 2


class StateParseError(ConfigError):
    """State expression could not be parsed."""
    pass


# ==================== Physics / validation (exit 3) ====================


class PhysicsError(PhononetError):
    """A physics computation or a validation failed."""

    exit_code = 3


class ValidationError(PhysicsError):
    """Data validation failed."""
    pass


class InvalidPairError(ValidationError):
    """Mode pair is not a valid pair of distinct modes."""
    pass


class IncompleteSpecError(ValidationError):
    """Beam-splitter spec lacks the physical parameters an operation needs."""
    pass


class CapacityError(PhysicsError):
    """Fock sector exceeds the configured capacity."""
    pass


class SolverError(PhysicsError):
    """Iterative solver did not converge."""
    pass


class InstabilityError(PhysicsError):
    """Linear chain is unstable (imaginary transverse mode)."""
    pass


class SearchError(PhysicsError):
    """One-dimensional search found no bracketing interval."""
    pass


class ResonanceError(PhysicsError):
    """A detuning that must be nonzero vanished."""
    pass


class AmbiguityError(PhysicsError):
    """Binary detection pattern matches more than one Fock state."""
    pass


class LostPhononError(PhysicsError):
    """All modes dark although the sector holds phonons."""
    pass


class FitError(PhysicsError):
    """Least-squares fit is degenerate."""
    pass


class IllConditionedError(PhysicsError):
    """Superoperator is too badly conditioned to invert."""
    pass


class DegenerateTemplateError(PhysicsError):
    """Configuration template yields a singular objective at every start."""
    pass


class TruncationError(PhysicsError):
    """Population leaked above the Fock cutoff."""
    pass


class StiffnessError(SolverError):
    """Adaptive integrator step size underflowed."""
    pass


# ==================== Output (exit 4) ====================


class ExportError(PhononetError):
    """Result files could not be written."""

    exit_code = 4
