"""Exception types shared across the toolkit."""


class ParitykitError(Exception):
    """Base class for all toolkit-specific errors."""


class EmptyGroupError(ParitykitError, ValueError):
    """A metric that conditions on a group was asked about an empty group."""


class InfeasibleTargetError(ParitykitError, ValueError):
    """No decision vector in the search space satisfies the parity target.

    Carries ``best_gap``, the smallest constraint violation that was
    achievable, so callers can report how close they got.
    """

    def __init__(self, message: str, best_gap: float | None = None):
        super().__init__(message)
        self.best_gap = best_gap


class ConvergenceError(ParitykitError, RuntimeError):
    """An iterative solver ran out of iterations before meeting its tolerance.

    ``gradient_norm`` holds the last observed gradient norm.
    """

    def __init__(self, message: str, gradient_norm: float | None = None):
        super().__init__(message)
        self.gradient_norm = gradient_norm


class CovarianceBoundError(ParitykitError, RuntimeError):
    """The penalty schedule ended with the covariance still above its bound.

    ``achieved`` holds the covariance magnitude that was reached.
    """

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class ThresholdSeparationError(ParitykitError, ValueError):
    """A decision set cannot be reproduced by a strict per-group threshold.

    Raised when duplicate probability values straddle the intended cut;
    ``value`` names the offending probability.
    """

    def __init__(self, message: str, value: float | None = None):
        super().__init__(message)
        self.value = value
