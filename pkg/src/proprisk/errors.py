"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input data violates the dataset schema or invariants."""


class EstimationError(RuntimeError):
    """The estimator is undefined on the given data (e.g. empty usable
    event-time set, or too few successful bootstrap resamples)."""
