"""Errors."""


class KineticError(Exception):
    """Base error of the kinetic solver."""


class DegenerateGradient(KineticError):
    """The level-set gradient vanishes where a normal is needed."""


class NoConvergence(KineticError):
    """A bisection failed to bracket the boundary within its iteration cap."""


class LeftDomain(KineticError):
    """A flow left the domain while it was required to stay inside."""


class ExitNotFound(KineticError):
    """A backward trajectory did not reach the boundary within the horizon."""


class NegativeInput(KineticError):
    """A distribution handed to the positivity scheme has negative entries."""


class NegativeDistribution(KineticError):
    """A distribution handed to the entropy has negative entries."""


class NonContractive(KineticError):
    """The Picard iteration failed to contract."""

    def __init__(self, message: str, residuals: list[float] | None = None) -> None:
        """Init."""
        super().__init__(message)
        self.residuals = residuals or []


class NonPositiveChannel(KineticError):
    """A diagnostics channel is not positive on the fitting window."""


class ScenarioParseError(KineticError):
    """The scenario file could not be parsed."""


class ScenarioValidationError(KineticError):
    """The scenario file violates an invariant."""
