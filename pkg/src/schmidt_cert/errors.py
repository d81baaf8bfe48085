"""Exception types raised across the package."""


class ValidationError(ValueError):
    """Input state, family or frame fails its invariants."""


class DimensionError(ValueError):
    """Dimensions are out of range or do not match."""


class UnsupportedDimensionError(DimensionError):
    """No internal construction exists for the requested dimension."""


class NotASicError(ValidationError):
    """A Weyl-Heisenberg orbit is not equiangular at the SIC overlap."""

    def __init__(self, message, worst_deviation):
        super().__init__(message)
        self.worst_deviation = worst_deviation


class NoKernelError(ValueError):
    """The witness operator is full rank, so no zero-value state exists."""


class NoThresholdError(ValueError):
    """The witness value does not cross the bound for v in [0, 1]."""


class IncompleteDataError(ValueError):
    """Count records do not cover every filter setting."""

    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = list(missing)


class OperatorTooLargeError(DimensionError):
    """Dense witness operator would exceed the configured dimension guard."""
