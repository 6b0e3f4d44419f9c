"""Exception hierarchy shared across the package."""

from __future__ import annotations


class ModejumpError(Exception):
    """Base class for all package-specific errors."""


class InvalidArgumentError(ModejumpError, ValueError):
    """An argument violates a documented precondition."""


class ResourceLimitError(ModejumpError):
    """A requested computation exceeds a declared size limit."""


class SingularDesignError(ModejumpError):
    """The selected design matrix is rank deficient."""


class ConvergenceError(ModejumpError):
    """An iterative fit failed to converge.

    Carries the last deviance reached so callers can decide how to score
    the model.
    """

    def __init__(self, message: str, last_deviance: float | None = None):
        super().__init__(message)
        self.last_deviance = last_deviance


class StateError(ModejumpError):
    """An operation was called in a phase where it is not allowed."""


class UnsupportedVariantError(ModejumpError):
    """The requested acceptance variant cannot be served by this optimizer."""


class ConfigError(ModejumpError):
    """A run configuration is invalid."""


class DataError(ModejumpError):
    """A dataset file could not be parsed."""
