"""Exception types shared across the package."""


class DynamicsError(Exception):
    """Base class for numerical failures in this package."""


class OrbitEscaped(DynamicsError):
    """An orbit left every bounded region we track (overflow guard or escape radius)."""

    def __init__(self, index, value=None, message=None):
        self.index = index
        self.value = value
        super().__init__(message or f"orbit escaped at iteration {index}")


class NoConvergence(DynamicsError):
    """Newton (or a continuation built on it) did not converge."""


class NonMinimalPeriod(DynamicsError):
    """A solver converged, but to an orbit of smaller (pre)period than requested."""

    def __init__(self, actual, point=None, message=None):
        self.actual = actual
        self.point = point
        super().__init__(message or f"converged to a solution of smaller type {actual}")


class NotPreperiodic(DynamicsError):
    """The critical orbit does not land on a cycle within the search horizon,
    or it is periodic (superattracting), which is not Misiurewicz."""


class SuperattractingCollision(DynamicsError):
    """The critical point lies on the preperiodic part of the orbit (A0 = 0)."""


class NotRepelling(DynamicsError):
    """A repelling cycle was required but the multiplier is not > 1."""


class DepthInsufficient(DynamicsError):
    """Successive rescaling depths disagree beyond tolerance."""

    def __init__(self, gap, tol, message=None):
        self.gap = gap
        self.tol = tol
        super().__init__(message or f"depth gap {gap:.3e} exceeds tolerance {tol:.1e}")


class NonGeometricGrowth(DynamicsError):
    """Derivatives along the orbit do not grow geometrically within the horizon."""


class ContinuationStalled(DynamicsError):
    """A continuation sequence stopped early; ``report`` holds the entries found so far."""

    def __init__(self, report, index, message=None):
        self.report = report
        self.index = index
        super().__init__(message or f"continuation stalled at index {index}")


class EmptySetError(ValueError):
    """A distance was requested for an empty grid set."""


class PreconditionError(ValueError):
    """Inputs violate an operation's precondition."""
