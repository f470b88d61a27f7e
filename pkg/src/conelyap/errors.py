"""Exception hierarchy shared by every module."""


class ConeLyapError(Exception):
    """Base class for all errors raised by conelyap."""


class InvalidInput(ConeLyapError, ValueError):
    """Shape, symmetry or precondition violation on an argument."""


class SingularMatrix(ConeLyapError, ArithmeticError):
    pass


class Unsupported(ConeLyapError, NotImplementedError):
    """The operation is not defined for this cone variant."""


class DomainError(ConeLyapError, ValueError):
    """A point was required to lie in the interior of the cone and does not."""


class NumericalFailure(ConeLyapError, ArithmeticError):
    pass


class InternalInconsistency(ConeLyapError, AssertionError):
    """Two computations that theory says must agree did not."""


class NotInMC(ConeLyapError):
    """The matrix does not leave the cone invariant."""

    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class NotHurwitz(ConeLyapError):
    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin
