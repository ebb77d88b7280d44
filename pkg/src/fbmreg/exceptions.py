"""Error types raised by the registration model and estimators."""


class FbmregError(Exception):
    """Base class for all fbmreg model/numeric errors."""


class DegenerateModel(FbmregError):
    """The requested correlation model is singular by construction."""


class NotPositiveDefinite(FbmregError):
    """The joint correlation matrix failed its Cholesky factorization."""


class SingularSystem(FbmregError):
    """The center-value elimination system is numerically singular."""


class SingularFim(FbmregError):
    """The Fisher information matrix cannot be inverted reliably."""


class SingularCovariance(FbmregError):
    """The covariance supplied to the outlier test is not invertible."""


class AllStartsFailed(FbmregError):
    """Every multi-start optimization launch failed or diverged."""


class InsufficientOverlap(FbmregError):
    """Too few template points map inside the reference support."""


class DegenerateScore(FbmregError):
    """A similarity score is undefined (constant signal on the mask)."""


class DegenerateFit(FbmregError):
    """A least-squares fit has a rank-deficient design (e.g. constant input)."""


class UnknownTestPoint(FbmregError):
    """Requested test point id is outside the catalogue."""
