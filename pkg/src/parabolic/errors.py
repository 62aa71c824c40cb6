"""Exception hierarchy shared by all modules.

Every error derives from :class:`ParabolicError`, so callers (and the CLI)
can catch one base class and map subclasses to exit codes.
"""
from __future__ import annotations

__all__ = [
    "ParabolicError",
    "ZeroRadiusError",
    "NotUnitError",
    "BadTopologyError",
    "BadExponentError",
    "CollisionNodeError",
    "BadDomainError",
    "DegeneratePathError",
    "StalledSegmentError",
    "BadWindowError",
    "NotMonotoneError",
    "NoConvergenceError",
    "InfeasibleEndpointsError",
    "NoContactError",
    "NotStabilizedError",
    "BadBracketError",
    "EnergyDriftError",
    "DegenerateCriticalError",
    "NonPositiveRZError",
]


class ParabolicError(Exception):
    """Base class for all library errors."""


class ZeroRadiusError(ParabolicError, ValueError):
    """A point too close to the origin was passed where |x| > 0 is required."""


class NotUnitError(ParabolicError, ValueError):
    """A vector expected on the unit sphere is not normalized."""


class BadTopologyError(ParabolicError):
    """The complement of a barrier set does not split into the two expected components."""


class BadExponentError(ParabolicError, ValueError):
    """Homogeneity exponent outside (0, 2)."""


class CollisionNodeError(ParabolicError):
    """A path node sits at (or numerically at) the origin."""


class BadDomainError(ParabolicError, ValueError):
    """A path is not parameterized on the interval the operation requires."""


class DegeneratePathError(ParabolicError):
    """A path has no kinetic energy, so it cannot be re-timed."""


class StalledSegmentError(ParabolicError):
    """A path segment has (numerically) zero length."""


class BadWindowError(ParabolicError, ValueError):
    """A diagnostic window overlaps the contact interval."""


class NotMonotoneError(ParabolicError):
    """The radius is not strictly monotone on the requested interval."""


class NoConvergenceError(ParabolicError):
    """The optimizer did not reach its tolerance in any restart."""


class InfeasibleEndpointsError(ParabolicError, ValueError):
    """An endpoint lies strictly inside the obstacle."""


class NoContactError(ParabolicError):
    """No node of the path touches the obstacle."""


class NotStabilizedError(ParabolicError):
    """Jump sequences still move too much between the two largest radii.

    The partial :class:`~parabolic.morse.MorseApproximation` is attached as
    ``approximation`` so callers can inspect the full sequences.
    """

    def __init__(self, message: str, approximation=None):
        super().__init__(message)
        self.approximation = approximation


class BadBracketError(ParabolicError, ValueError):
    """The two ends of a bisection bracket do not straddle the transition."""


class EnergyDriftError(ParabolicError):
    """A zero-energy integration drifted beyond its tolerance."""


class DegenerateCriticalError(ParabolicError):
    """A critical point of the angular potential is degenerate (or the potential is flat)."""


class NonPositiveRZError(ParabolicError, ValueError):
    """The extended planar system was evaluated with r <= 0 or z <= 0."""
