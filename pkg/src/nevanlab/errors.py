"""Exception hierarchy shared by all nevanlab modules."""

from __future__ import annotations


class NevanlabError(Exception):
    """Base class for every error raised by nevanlab."""


class DomainError(NevanlabError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class ConfigError(NevanlabError, ValueError):
    """Invalid experiment configuration or function identifier."""


class UnsupportedRangeError(NevanlabError):
    """An evaluator was asked for a point it cannot evaluate accurately."""


class NumericalError(NevanlabError):
    """Base class for numerical non-convergence."""


class QuadratureError(NumericalError):
    def __init__(self, message, estimate, gap, r=None):
        super().__init__(message)
        self.estimate = estimate
        self.gap = gap
        self.r = r


class StiffnessError(NumericalError):
    """The ODE step size collapsed; ``position`` is where it happened."""

    def __init__(self, message, position):
        super().__init__(message)
        self.position = position


class ZeroCountError(NumericalError):
    """Winding number failed its integrality certificate or monotonicity."""


class PreconditionError(NevanlabError):
    """A theorem or operation precondition does not hold for the inputs."""
