"""Exception hierarchy shared by every module of the package."""


class CevWkbError(Exception):
    """Base class for all errors raised by :mod:`cev_wkb`."""


class ParameterDomainError(CevWkbError, ValueError):
    """A model or contract parameter lies outside its admissible domain."""


class KernelDomainError(CevWkbError, ArithmeticError):
    """A closed-form expression of the classical path is undefined at this point.

    ``point`` holds the offending ``(x, x_T, T)`` when known.
    """

    def __init__(self, message, point=None):
        if point is not None:
            message = f"{message} [x={point[0]!r}, x_T={point[1]!r}, T={point[2]!r}]"
        super().__init__(message)
        self.point = point


class DegeneratePathError(KernelDomainError):
    """The endpoint constant D2 vanishes (momentum pinned at -b/2)."""


class LogDomainError(KernelDomainError):
    """The ratio inside the action / exp-factor logarithm is not positive."""


class NonPositiveJError(KernelDomainError):
    """The Van Vleck-Morette determinant is zero or negative."""


class MomentumPoleError(KernelDomainError):
    """The classical momentum diverges inside the requested time window."""


class EndpointReconstructionError(KernelDomainError):
    """The constants D1, D2 fail to reproduce the requested endpoints."""


class NumericConvergenceError(CevWkbError, RuntimeError):
    """An iterative numerical routine stopped before reaching its tolerance.

    Attributes
    ----------
    estimate : float or None
        Last available estimate of the quantity being computed.
    error_bound : float or None
        Error (or tail) estimate attached to ``estimate``.
    """

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound
