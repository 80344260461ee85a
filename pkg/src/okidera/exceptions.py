"""Exception types raised by the identification pipeline."""


class OkideraError(ValueError):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(OkideraError):
    """Two objects that must agree in shape do not; the message names the pair."""


class HorizonError(OkideraError):
    """The observer horizon p is incompatible with the dataset length."""


class InsufficientDataError(OkideraError):
    """Fewer usable regression equations than the configured minimum."""


class InsufficientHorizonError(OkideraError):
    """Hankel block dimensions alpha + beta exceed the available horizon p."""


class OrderError(OkideraError):
    """Requested realization order exceeds the available singular values."""


class DegenerateRealizationError(OkideraError):
    """The Hankel matrix is zero (or rank-deficient below the requested order)."""


class SingularFrequencyError(OkideraError):
    """Requested evaluation point coincides with a pole of the model."""


class GridMismatchError(OkideraError):
    """Two frequency responses being compared use different grids."""
