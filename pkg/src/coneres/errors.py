"""Exception types shared across the package."""


class SurfaceValidationError(ValueError):
    """A surface description violates a structural invariant."""


class PolygonError(ValueError):
    """Polygon input is unusable: non-convex, repeated or collinear vertices."""


class GeometricRaySingularity(ValueError):
    """Angle difference lies on a geometric ray where the kernel is singular."""


class NotAdjacent(ValueError):
    """A transfer entry was requested for a non-adjacent edge pair."""


class ZeroNearBoundary(RuntimeError):
    """Phase tracking refused to converge; a zero sits too near the contour."""


class NoConvergence(RuntimeError):
    """Iterative refinement failed to reach the requested residual."""


class EscapedBox(RuntimeError):
    """Newton refinement left the box that localised the root."""


class AuditError(RuntimeError):
    """Winding bookkeeping did not conserve; scan results are unreliable."""


class InsufficientData(ValueError):
    """Not enough points for the requested statistic."""


class CostBudgetExceeded(RuntimeError):
    """An oracle evaluation would exceed the configured point budget."""
