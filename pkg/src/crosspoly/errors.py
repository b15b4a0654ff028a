"""Exception types shared across the toolkit."""


class CrossPolyError(Exception):
    """Base class for all toolkit errors."""


class InputError(CrossPolyError, ValueError):
    """A precondition on the inputs was violated."""


class InfeasibleError(CrossPolyError):
    """The linear system has no solution within the feasibility tolerance."""


class NumericalError(CrossPolyError):
    """An iterative routine lost numerical validity (cycling, singularity)."""


class ContractError(CrossPolyError):
    """A caller-side guarantee required by the operation was not supplied."""


class ConvergenceError(CrossPolyError):
    """Iteration cap reached before the requested tolerance.

    Carries the best upper/lower distance bounds reached so far.
    """

    def __init__(self, message, upper=None, lower=None, iterations=None):
        super().__init__(message)
        self.upper = upper
        self.lower = lower
        self.iterations = iterations


class MaureyFailure(CrossPolyError):
    """Retry budget exhausted without hitting the target distance."""

    def __init__(self, message, best_distance=None, attempts=None):
        super().__init__(message)
        self.best_distance = best_distance
        self.attempts = attempts
