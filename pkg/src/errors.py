#!/usr/bin/env python3
"""
Error Types
Exception hierarchy shared by every holoflow module
"""

from typing import Iterable, Optional


class HoloflowError(Exception):
    """Base class for all analysis errors"""


class ExpressionSyntaxError(HoloflowError, ValueError):
    """Malformed expression source"""

    def __init__(self, message: str, offset: int, expected: Iterable[str] = ()):
        self.offset = offset
        self.expected = tuple(sorted(set(expected)))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at byte {offset}{detail}")


class EvaluationError(HoloflowError):
    """Expression could not be evaluated at a point (pole, overflow)"""

    def __init__(self, message: str, point: Optional[complex] = None):
        self.point = point
        super().__init__(message if point is None else f"{message} at z={point!r}")


class PreconditionError(HoloflowError):
    """An operation was called outside its domain"""


class InvalidOrder(PreconditionError):
    """Equilibrium order does not fit the requested operation"""


class BoundaryZeroError(HoloflowError):
    """A zero of F lies on (or numerically on) a contour"""


class NonConvergence(HoloflowError):
    """An iterative procedure failed to converge"""


class ClusterError(HoloflowError):
    """Zeros are too close to be separated numerically"""


class OrderUndetermined(HoloflowError):
    """All Taylor coefficients up to the truncation are negligible"""


class NotADirection(HoloflowError):
    """Angle is not a definite direction of the equilibrium"""


class StepUnderflow(HoloflowError):
    """Integrator step fell below the configured minimum"""

    def __init__(self, message: str, time: float, point: complex):
        self.time = time
        self.point = point
        super().__init__(f"{message} (t={time:.6g}, z={point!r})")


class NoReturn(HoloflowError):
    """Orbit did not return to a transversal within the time budget"""


class Inconclusive(HoloflowError):
    """Numerical evidence is inconsistent across scales"""


class WitnessFailed(HoloflowError):
    """A finite elliptic decomposition witness could not be completed"""

    def __init__(self, message: str, sector: int, radius: float):
        self.sector = sector
        self.radius = radius
        super().__init__(f"{message} (sector {sector}, radius {radius:.3g})")


class ConsistencyError(HoloflowError):
    """Two independent computation paths disagree"""
