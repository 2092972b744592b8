"""Exception hierarchy for the slowpush package."""


class SlowpushError(Exception):
    """Base class for all package errors."""


class DomainError(SlowpushError):
    """Input outside the mathematical or physical domain of an operation."""


class ConvergenceError(SlowpushError):
    """An iterative solve failed to reach its tolerance."""


class RangeError(SlowpushError):
    """Queried epoch outside the span supported by a data source."""


class CloseEncounterError(SlowpushError):
    """State inside the singularity guard radius of a perturbing body."""


class FormatError(SlowpushError):
    """Malformed input file; message carries the offending position."""


class CoverageError(SlowpushError):
    """Requested geographic region not covered by the loaded raster."""


class ReanchorError(SlowpushError):
    """No impacting epoch offset found inside the search window."""


class StepSizeError(SlowpushError):
    """Integrator step underflow (stiffness or singularity)."""

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class JacobianStepError(SlowpushError):
    """Finite-difference step still misses the Earth after halving retries."""


class ConditioningError(SlowpushError):
    """Covariance lost symmetry or positive semidefiniteness."""


class PropellantError(SlowpushError):
    """Propellant mass dropped to the dry-mass floor."""

    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch


class ConfigError(SlowpushError):
    """Scenario configuration problem; message carries the line number."""


class ChainedInputError(SlowpushError):
    """An artifact from a prerequisite command is missing."""
