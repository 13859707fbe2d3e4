"""Exception types raised across the package."""


class QFDlogError(Exception):
    """Base class for all package errors."""


class NonResidue(QFDlogError, ValueError):
    """Raised when a modular square root is requested for a non-residue."""


class Inert(QFDlogError, ValueError):
    """Raised when asking for a prime ideal above an inert prime."""


class NotSmooth(QFDlogError):
    """An ideal does not factor over the factor base.

    ``cofactor`` holds the part of the norm left after removing factor-base
    primes, so callers can decide whether it is a usable large prime.
    """

    def __init__(self, message, cofactor=None, partial=None):
        super().__init__(message)
        self.cofactor = cofactor
        self.partial = partial


class RankDeficient(QFDlogError, ArithmeticError):
    pass


class NoSolution(QFDlogError, ArithmeticError):
    pass


class PrecisionLoss(QFDlogError, ArithmeticError):
    pass


class RelationDeficit(QFDlogError):
    pass


class Timeout(QFDlogError):
    pass


class Unverified(QFDlogError):
    pass


class LikelyNonPrincipal(NoSolution):
    pass
