"""Exception types shared across the package."""


class PhasimError(Exception):
    """Base class for all phasim-specific errors."""


class ZeroDetuningError(PhasimError):
    """A one-photon detuning appearing in a denominator is zero."""


class ZeroBeatError(PhasimError):
    """The beat frequency between the two signal fields is zero."""


class ZeroShiftedDetuningError(PhasimError):
    """A beat-shifted detuning combination appearing in a denominator is zero."""


class RegimeViolationError(PhasimError):
    """A validity precondition of the requested formula is violated.

    `condition` names the precondition that failed.
    """

    def __init__(self, condition: str, value: float):
        self.condition = condition
        self.value = value
        super().__init__(f"regime violated: {condition} (got {value:g})")


class NonUniformDetuningsError(PhasimError):
    """An operation requiring equal-magnitude detunings got a non-uniform ladder."""


class NondeterministicOutcomeError(PhasimError):
    """An outcome probability fell strictly between 0 and 1 where exact
    digit recovery requires a deterministic measurement."""


class DegreeOverflowError(PhasimError):
    """A posterior update would push the Fourier degree past the configured cap."""


class EmptyEnsembleError(PhasimError):
    """An ensemble statistic was requested for an empty result set."""


class BudgetTooSmallError(PhasimError):
    """The quadrature budget does not resolve the fastest oscillation."""


class BudgetExceededError(PhasimError):
    """A campaign would consume more elementary measurements than allowed."""


class DegenerateFitError(PhasimError):
    """Too few usable points, or degenerate abscissas, for a scaling fit."""
