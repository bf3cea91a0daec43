"""Exception hierarchy for kgdecay."""


class KGError(Exception):
    """Base class for all kgdecay errors."""


class InvalidInputError(KGError, ValueError):
    """Raised when an argument is malformed (non-finite data, bad shapes, ...)."""


class AdmissibilityError(KGError):
    """Raised when a potential does not satisfy the decay hypothesis."""


class DomainError(KGError, ValueError):
    """Raised when a kernel or resolvent is queried outside its declared domain."""


class BranchPointError(DomainError):
    """Raised when the spectral parameter sits exactly on an edge point."""


class SpectralPointError(KGError):
    """Raised when a resolvent is requested at (or too close to) an eigenvalue."""

    def __init__(self, message, nearest=None):
        super().__init__(message)
        self.nearest = nearest


class GeometryError(KGError):
    """Raised when a box, light cone or contour does not fit the configuration."""


class StabilityError(KGError):
    """Raised when a time integrator blows up."""


class InconclusiveError(KGError):
    """Raised when a diagnostic cannot reach a verdict on the given box."""


class PreconditionError(KGError):
    """Raised when a theorem hypothesis (e.g. regularity at the edge) fails."""
