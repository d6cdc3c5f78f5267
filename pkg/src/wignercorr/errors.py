"""Exception types raised across the package."""


class WignerCorrError(Exception):
    """Base class for all package errors."""


class MissingMoment(WignerCorrError, KeyError):
    """An ensemble does not define an entry moment that a polynomial needs."""


class OrderMismatch(WignerCorrError, ValueError):
    """Formal series with incompatible variable lists were combined."""


class DegreeTooLarge(WignerCorrError, ValueError):
    """Requested enumeration exceeds the configured degree cap."""


class MomentOrderViolation(WignerCorrError, ValueError):
    """Two ensembles do not share the moment prefix a comparison requires."""


class DomainError(WignerCorrError, ValueError):
    """A kernel or Green function was evaluated outside its domain."""


class DegenerateVariance(WignerCorrError, ArithmeticError):
    """Batch estimates have zero spread but disagree with the exact value."""


class ConnectedMismatch(WignerCorrError, AssertionError):
    """The two independent routes to a connected correlator disagree."""
