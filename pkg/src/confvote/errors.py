"""Exception types raised by the package."""


class ConfvoteError(Exception):
    """Base class for all package errors."""


class DomainError(ConfvoteError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConvergenceError(ConfvoteError, ArithmeticError):
    """An iterative evaluation hit its iteration cap before converging."""


class AssumptionViolation(ConfvoteError):
    """A premise of a bound does not hold for the given population.

    ``premise`` names the failed condition (``"delta_p"`` or ``"q_min"``).
    """

    def __init__(self, premise: str, message: str) -> None:
        super().__init__(message)
        self.premise = premise


class ConfigError(ConfvoteError):
    """Malformed or invalid experiment configuration."""
