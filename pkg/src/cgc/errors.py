"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    pass


class OutOfRange(ValueError):
    """Scenario parameter outside the range for which a solution exists."""


class NotSmooth(ValueError):
    """Raised when a smooth-only operation hits a vertex."""


class DegenerateIntersection(ValueError):
    pass


class Infeasible(RuntimeError):
    pass


class NonConvergence(RuntimeError):
    """Solver did not reach tolerance; ``history`` holds the residual record."""

    def __init__(self, message, history=None, patch=None):
        super().__init__(message)
        self.history = list(history or [])
        self.patch = patch
