"""Fragment screening: isotropy and increment-normality gates.

Fragments whose texture is anisotropic or whose increments are non-normal
sit outside the fBm model; pairs are sorted into four groups by the two
attributes (I: isotropic and normal ... IV: neither).  Both tests are run
on the template fragment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateFit
from .lilliefors import LillieforsResult, lilliefors_test
from .validation import as_fragment, check_pair

ACF_MAX_LAG = 2
ISOTROPY_RATIO_LIMIT = 2.0
NORMALITY_ALPHA = 0.01


def sample_autocorrelation(pixels, max_lag: int = ACF_MAX_LAG) -> np.ndarray:
    """Sample autocorrelation surface over lags |di|, |dj| <= max_lag.

    The sample mean is removed first; each lag sum is normalized by the full
    pixel count (tapered estimator: the mild symmetric damping it applies
    stabilizes the curvature fit far better than per-overlap averaging on
    fragments this small) and the surface is scaled to 1 at zero lag.
    Returned array has shape (2*max_lag+1, 2*max_lag+1) with lag (di, dj)
    at index (di + max_lag, dj + max_lag).
    """
    x = np.asarray(pixels, dtype=float)
    n = x.shape[0]
    if n <= max_lag:
        raise ValueError(f"fragment of size {n} too small for lag {max_lag}")
    x = x - x.mean()
    r00 = np.mean(x * x)
    if r00 == 0.0:
        raise DegenerateFit("constant fragment has no autocorrelation")
    size = 2 * max_lag + 1
    acf = np.empty((size, size))
    for di in range(-max_lag, max_lag + 1):
        for dj in range(-max_lag, max_lag + 1):
            a = x[max(0, di):n + min(0, di), max(0, dj):n + min(0, dj)]
            b = x[max(0, -di):n + min(0, -di), max(0, -dj):n + min(0, -dj)]
            acf[di + max_lag, dj + max_lag] = np.sum(a * b) / (n * n) / r00
    return acf


def quadratic_curvature_ratio(acf, max_lag: int = None):
    """Least-squares quadratic fit of an autocorrelation surface.

    Fits r(di, dj) = a di^2 + b dj^2 + 2 c di dj + d di + e dj + f and
    returns (|eig|max / |eig|min of [[a, c], [c, b]], (a, b, c)).
    """
    acf = np.asarray(acf, dtype=float)
    if max_lag is None:
        max_lag = (acf.shape[0] - 1) // 2
    lags = np.arange(-max_lag, max_lag + 1, dtype=float)
    di, dj = np.meshgrid(lags, lags, indexing="ij")
    di, dj = di.ravel(), dj.ravel()
    design = np.column_stack([di ** 2, dj ** 2, 2 * di * dj, di, dj,
                              np.ones_like(di)])
    coef, residuals, rank, _ = np.linalg.lstsq(design, acf.ravel(), rcond=None)
    if rank < design.shape[1]:
        raise DegenerateFit("quadratic autocorrelation fit is rank-deficient")
    a, b, c = coef[0], coef[1], coef[2]
    eigvals = np.abs(np.linalg.eigvalsh(np.array([[a, c], [c, b]])))
    if eigvals.min() == 0.0:
        return float("inf"), (a, b, c)
    return float(eigvals.max() / eigvals.min()), (a, b, c)


@dataclass(frozen=True)
class IsotropyResult:
    isotropic: bool
    eigen_ratio: float


def isotropy_test(fragment, max_lag: int = ACF_MAX_LAG,
                  ratio_limit: float = ISOTROPY_RATIO_LIMIT) -> IsotropyResult:
    """Curvature-eigenvalue isotropy test of a fragment's autocorrelation."""
    fragment = as_fragment(fragment)
    if fragment.size < 7:
        raise ValueError("isotropy test needs a fragment of size >= 7")
    acf = sample_autocorrelation(fragment.pixels, max_lag)
    ratio, _ = quadratic_curvature_ratio(acf, max_lag)
    return IsotropyResult(isotropic=ratio < ratio_limit, eigen_ratio=ratio)


@dataclass(frozen=True)
class NormalityResult:
    normal: bool
    vertical: LillieforsResult
    horizontal: LillieforsResult


def normality_test(fragment, alpha: float = NORMALITY_ALPHA) -> NormalityResult:
    """Lilliefors test on both unity-lag increment samples.

    Normal only when both directions pass; a zero-variance increment sample
    (constant fragment) fails outright.
    """
    fragment = as_fragment(fragment)
    if fragment.size < 5:
        raise ValueError("normality test needs a fragment of size >= 5")
    results = []
    for axis in (0, 1):
        increments = np.diff(fragment.pixels, axis=axis).ravel()
        if increments.std() == 0.0:
            results.append(LillieforsResult(statistic=float("inf"),
                                            critical=0.0, rejected=True))
        else:
            results.append(lilliefors_test(increments, alpha))
    vertical, horizontal = results
    return NormalityResult(normal=not (vertical.rejected or horizontal.rejected),
                           vertical=vertical, horizontal=horizontal)


GROUPS = ("I", "II", "III", "IV")


@dataclass(frozen=True)
class ScreeningReport:
    isotropic: bool
    eigen_ratio: float
    normal: bool
    lilliefors: NormalityResult
    group: str


def classify(reference, template, max_lag: int = ACF_MAX_LAG,
             alpha: float = NORMALITY_ALPHA) -> ScreeningReport:
    """Screen a fragment pair into groups I-IV (template fragment tested)."""
    _, template = check_pair(reference, template)
    iso = isotropy_test(template, max_lag)
    norm = normality_test(template, alpha)
    if iso.isotropic:
        group = "I" if norm.normal else "III"
    else:
        group = "II" if norm.normal else "IV"
    return ScreeningReport(isotropic=iso.isotropic, eigen_ratio=iso.eigen_ratio,
                           normal=norm.normal, lilliefors=norm, group=group)
