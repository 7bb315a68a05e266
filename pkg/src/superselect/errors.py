"""Exception hierarchy shared by every module."""


class SuperselectError(Exception):
    """Base class for all errors raised by this package."""


class DimMismatch(SuperselectError, ValueError):
    pass


class NotHermitian(SuperselectError, ValueError):
    pass


class NotUnitary(SuperselectError, ValueError):
    pass


class NotNormalized(SuperselectError, ValueError):
    pass


class BadDimension(SuperselectError, ValueError):
    pass


class UnknownElement(SuperselectError, LookupError):
    pass


class MixedActionKinds(SuperselectError, TypeError):
    pass


class StatesDontSpan(SuperselectError, ValueError):
    pass


class PreconditionViolated(SuperselectError, ValueError):
    """Raised when an assumption of the error bound is not met.

    ``which`` names the failed assumption.
    """

    def __init__(self, which, residual):
        self.which = which
        self.residual = residual
        super().__init__(f"{which} violated (residual {residual:.3e})")


class EmptyCommutant(SuperselectError, ValueError):
    pass


class FloorViolation(SuperselectError, RuntimeError):
    """The constrained search went below the analytic error floor."""


class ParseError(SuperselectError, ValueError):
    pass


class UnresolvedReference(SuperselectError, LookupError):
    pass


class FlagViolation(SuperselectError, ValueError):
    pass

