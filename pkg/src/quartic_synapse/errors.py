"""Exception types shared across the package."""


class ModelError(Exception):
    """Base class for all domain errors raised by this package."""


class DuplicateZero(ModelError):
    """Two zeros of the quartic coincide within tolerance."""


class NonNegativityViolation(ModelError):
    """The smallest zero of the quartic is negative."""


class FoldNotFound(ModelError):
    """A fold bracket between consecutive zeros failed to produce a root."""


class AssumptionViolated(ModelError):
    """A structural assumption on the model configuration does not hold."""


class NotAnEquilibrium(ModelError):
    """The supplied point is not an equilibrium to residual tolerance."""


class PoleInInterval(ModelError):
    """An integrand pole lies inside the requested integration interval."""


class EntryOutOfRange(ModelError):
    """Entry point outside the admissible interval for the delay relation."""


class NoExit(ModelError):
    """No exit point found below the configured search bound."""


class NoExitBeforeTmax(ModelError):
    """Simulated orbit did not leave the axis neighbourhood before t_max."""


class StepSizeUnderflow(ModelError):
    """Integrator step size fell below the representable minimum."""


class MaxStepsExceeded(ModelError):
    """Integrator exceeded its step budget."""


class SeedCorrectionFailed(ModelError):
    """Newton correction of a small periodic seed did not converge."""


class CorrectorDiverged(ModelError):
    """Continuation corrector failed even at the minimum arclength step."""


class MissingArtifact(ModelError):
    """A required data file for plotting does not exist."""


class ConfigError(ModelError):
    """Invalid run configuration."""
