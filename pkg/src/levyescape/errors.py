"""Exception hierarchy shared across the toolkit."""


class EscapeToolkitError(Exception):
    """Base class for all toolkit errors."""


class DomainValidationError(EscapeToolkitError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class ConfigError(EscapeToolkitError, ValueError):
    """A problem file or configuration value could not be parsed or validated."""


class AccuracyError(EscapeToolkitError, RuntimeError):
    """A numerical routine could not reach its accuracy target.

    ``achieved`` carries the best error estimate that was reached.
    """

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class SolverError(EscapeToolkitError, RuntimeError):
    """A linear-system solve failed (singular or badly conditioned matrix)."""


class RootNotFoundError(EscapeToolkitError, RuntimeError):
    """A bracketed root search exhausted its search range without a sign change."""


class EstimateUnavailableError(EscapeToolkitError, RuntimeError):
    """Monte Carlo produced no usable paths (everything censored)."""
