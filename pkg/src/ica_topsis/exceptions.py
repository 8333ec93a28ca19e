"""Errors and warnings raised across the package."""


class IcaTopsisError(Exception):
    """Base class for all package-specific errors."""


class ZeroColumnError(IcaTopsisError):
    """A criterion column is identically zero and cannot be normalized."""


class SingularCovarianceError(IcaTopsisError):
    """Covariance matrix is not invertible even after ridge regularization."""


class RankDeficientError(IcaTopsisError):
    """Sample covariance of the observations is rank deficient."""


class ZeroDiagonalError(IcaTopsisError):
    """A diagonal entry of the permuted mixing matrix is exactly zero,
    so its sign cannot be corrected."""


class NotConvergedError(IcaTopsisError):
    """Separation did not converge within the iteration/restart budget.

    Carries the best iterate so callers can still use (and score) it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class DegenerateAlternativesWarning(UserWarning):
    """All alternatives coincide in weighted space; similarity set to 0.5."""


class TieBreakWarning(UserWarning):
    """An exact tie was broken deterministically by lowest index."""
