"""
Exception hierarchy for the trap design toolkit.

Each class carries the process exit status the command line maps it to.
"""


class TrapDesignError(Exception):
    """Base class for all toolkit failures."""

    exit_code = 1


class ConfigError(TrapDesignError):
    """Run configuration is missing a key or holds an invalid value."""

    exit_code = 1

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class NotConvergedError(TrapDesignError):
    """An iterative solver hit its iteration cap."""

    exit_code = 2


class NoNullFoundError(NotConvergedError):
    """The vertical scan found no pseudopotential minimum above the surface."""


class SaddleRejectedError(NotConvergedError):
    """Every restart ended on a configuration with negative curvature."""


class UnstableTrapError(TrapDesignError):
    """Negative curvature of the trap or of an ion configuration."""

    exit_code = 3


class SingularityError(TrapDesignError, ValueError):
    """Evaluation point lies on a wire or on/below the electrode plane."""

    exit_code = 1


class StabilityWarning(UserWarning):
    """Mathieu q above the pseudopotential validity limit."""
