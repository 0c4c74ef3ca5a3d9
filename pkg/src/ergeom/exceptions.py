"""Exception hierarchy.

Every error carries enough context in its message to identify the offending
input. Data-validation errors subclass ``ValueError`` so callers that only care
about "bad input" can catch that.
"""


class ErgeomError(Exception):
    """Base class for all package errors."""


class GraphError(ErgeomError, ValueError):
    pass


class OutOfRangeVertex(GraphError, IndexError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class Unreachable(GraphError):
    pass


class Disconnected(GraphError):
    pass


class EmptyGraph(GraphError):
    pass


class InvalidProbability(ErgeomError, ValueError):
    pass


class InvalidLaw(ErgeomError, ValueError):
    pass


class InvalidDegree(ErgeomError, ValueError):
    pass


class InvalidDimension(ErgeomError, ValueError):
    pass


class InvalidParams(ErgeomError, ValueError):
    pass


class SubcriticalDegree(InvalidParams):
    """Mean degree d <= 1: no giant component, only gamma = 0 solves the fixed point."""


class DimensionTooLarge(ErgeomError, ValueError):
    pass


class TooLargeForExact(ErgeomError, ValueError):
    pass


class MixedSpecs(ErgeomError, ValueError):
    pass


class EmptyMeasure(ErgeomError, ValueError):
    pass


class EmptyInput(ErgeomError, ValueError):
    pass


class InsufficientProfiles(ErgeomError, ValueError):
    pass


class ConvergenceFailure(ErgeomError, RuntimeError):
    """Iterative eigensolver hit its iteration limit.

    ``estimates`` and ``bounds`` hold the best Ritz values found and their
    residual norms (an upper bound on the distance to a true eigenvalue).
    """

    def __init__(self, message, estimates=None, bounds=None):
        super().__init__(message)
        self.estimates = estimates
        self.bounds = bounds


class SandwichViolation(ErgeomError, AssertionError):
    """The Cheeger inequality failed; this points at a bug, not at the data."""
