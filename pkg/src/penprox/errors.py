"""Exception types shared across the package."""

__all__ = ["PenproxError", "ConfigError", "DataError", "DivergedError", "NumericalError"]


class PenproxError(Exception):
    """Base class for package-specific errors."""


class ConfigError(PenproxError):
    """Invalid or inconsistent configuration."""


class DataError(PenproxError):
    """Unreadable or invalid input data."""


class DivergedError(PenproxError):
    """The objective became non-finite during optimization.

    Carries the last finite parameter state in ``state``.
    """

    def __init__(self, message, state=None, iteration=None):
        super().__init__(message)
        self.state = state
        self.iteration = iteration


class NumericalError(PenproxError):
    """A numerical routine failed to reach its guarantee."""
