"""Exception types raised by the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition (bad shape, range, length)."""


class DegenerateError(ValueError):
    """Statistic is undefined for the given data (zero variance, zero mean)."""


class FitError(RuntimeError):
    """A model could not be fitted (singular design, non-invertible result)."""
