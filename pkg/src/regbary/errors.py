"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates an operation's precondition."""


class NoFiniteMetricError(ValueError):
    """A graph does not induce a finite metric (it is disconnected)."""


class ValidationError(ValueError):
    """A space or measure violates its invariants beyond tolerance."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConvergenceError(RuntimeError):
    """The epsilon sweep did not reach the gap tolerance.

    The partial path is kept on ``path`` so callers can still export it.
    """

    def __init__(self, message, path):
        super().__init__(message)
        self.path = path


class PropertyFailure(AssertionError):
    """A theoretical property was observed to fail."""

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = tuple(indices)
