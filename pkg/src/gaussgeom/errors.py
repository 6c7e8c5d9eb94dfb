"""Exception types raised across the package."""


class GeometryError(Exception):
    """Base class for all errors raised by gaussgeom."""


class DomainError(GeometryError, ValueError):
    """A point or parameter lies outside the upper half-plane / valid range."""


class SingularMetricError(GeometryError):
    pass


class DegeneratePlaneError(GeometryError):
    pass


class NonFiniteError(GeometryError, ArithmeticError):
    """An integrand produced NaN or infinity at a quadrature node."""


class IncompatibleStructureError(GeometryError):
    """The connection does not have a totally symmetric cubic form."""


class RankAnomalyError(GeometryError):
    """A linear system had an unexpected nullspace dimension.

    This always signals an implementation bug rather than a legitimate result.
    """


class BoundaryEvent(GeometryError):
    """A geodesic left the half-plane (y dropped below the allowed minimum)."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory or []


class StepSizeError(GeometryError):
    pass


class DivergenceError(GeometryError):
    pass
