"""Fisher information, the Cramér-Rao covariance bound, and the outlier test.

For a zero-mean Gaussian sample whose covariance carries all parameter
dependence, the information matrix entries are

    I[i, j] = 0.5 * tr(dR/dθi · R^-1 · dR/dθj · R^-1),

computed here from the analytic derivative matrices.  The RST error bound
is read from the RST block of the inverse of the *full* 8x8 matrix, so the
unknown texture parameters inflate the bound as they must.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from .exceptions import SingularCovariance, SingularFim
from .model import CorrelationEngine, _theta_of
from .params import N_PARAMS, PARAM_NAMES, RST_SLICE

RAD_TO_DEG = 180.0 / math.pi

CONDITION_LIMIT = 1e12


def fisher_information(params, n_ri, n_ti, noise_var_ri, noise_var_ti) -> np.ndarray:
    """The 8x8 Fisher information matrix at the given parameters.

    Ordered as PARAM_NAMES; symmetric by construction (each distinct entry
    is computed once).  Angles in radians.
    """
    theta = _theta_of(params)
    engine = CorrelationEngine(n_ri, n_ti, noise_var_ri, noise_var_ti)
    cf = engine.cholesky_lower(theta)
    solved = [cho_solve((cf, True), engine.derivative(theta, i),
                        check_finite=False) for i in range(N_PARAMS)]
    info = np.zeros((N_PARAMS, N_PARAMS))
    for i in range(N_PARAMS):
        for j in range(i, N_PARAMS):
            info[i, j] = info[j, i] = 0.5 * np.sum(solved[i] * solved[j].T)
    return info


@dataclass(frozen=True)
class CrlbResult:
    """Cramér-Rao covariance bound and its per-parameter STD readout.

    cov, sigma_theta and rst_cov are in internal units (angles in radians);
    sigma_rst reports the angle entry in degrees.
    """

    cov: np.ndarray
    sigma_theta: np.ndarray
    rst_cov: np.ndarray

    @property
    def sigma_rst(self) -> np.ndarray:
        """STD bounds (dt px, ds px, alpha degrees, dr)."""
        out = self.sigma_theta[RST_SLICE].copy()
        out[2] *= RAD_TO_DEG
        return out


def crlb(params, n_ri, n_ti, noise_var_ri, noise_var_ti) -> CrlbResult:
    """Invert the full information matrix and extract the RST block."""
    info = fisher_information(params, n_ri, n_ti, noise_var_ri, noise_var_ti)
    eigvals = np.linalg.eigvalsh(info)
    if eigvals[0] <= 0 or eigvals[-1] / eigvals[0] > CONDITION_LIMIT:
        null_dir = np.linalg.eigh(info)[1][:, 0]
        worst = PARAM_NAMES[int(np.argmax(np.abs(null_dir)))]
        raise SingularFim(
            "Fisher information matrix is singular or ill-conditioned "
            f"(eigenvalues in [{eigvals[0]:.3e}, {eigvals[-1]:.3e}]); "
            f"null direction dominated by {worst!r}")
    cov = np.linalg.inv(info)
    sigma = np.sqrt(np.diag(cov))
    return CrlbResult(cov=cov, sigma_theta=sigma,
                      rst_cov=cov[RST_SLICE, RST_SLICE])


def chi2_cdf_4df(q) -> float:
    """CDF of the chi-square distribution with 4 degrees of freedom."""
    q = np.asarray(q, dtype=float)
    out = np.where(q > 0, -np.expm1(-q / 2.0) - (q / 2.0) * np.exp(-q / 2.0), 0.0)
    return float(out) if out.ndim == 0 else out


def chi2_quantile_4df(tail: float) -> float:
    """Upper-tail quantile: the q with P(Q > q) = tail, Q ~ chi2(4).

    Solved by Newton iteration on log(sf(q)) = log(tail); the survival
    function is exp(-q/2) * (1 + q/2).
    """
    if not 0.0 < tail < 1.0:
        raise ValueError(f"tail probability must be in (0, 1), got {tail}")
    q = max(-2.0 * math.log(tail), 1e-8)
    for _ in range(100):
        f = -q / 2.0 + math.log1p(q / 2.0) - math.log(tail)
        fprime = -q / (2.0 * (q + 2.0))
        step = f / fprime
        q_new = q - step
        if q_new <= 0:
            q_new = q / 2.0
        if abs(q_new - q) < 1e-13 * max(q, 1.0):
            return q_new
        q = q_new
    return q


DEFAULT_OUTLIER_TAIL = 1e-6


@dataclass(frozen=True)
class OutlierVerdict:
    """Quadratic-form outlier statistic against its chi-square threshold."""

    q: float
    threshold: float
    is_outlier: bool


def outlier_test(rst_hat, rst_ref, rst_cov,
                 tail: float = DEFAULT_OUTLIER_TAIL) -> OutlierVerdict:
    """Mahalanobis test of an RST estimate against a reference value.

    rst_cov is the 4x4 RST covariance bound (angles in radians); under the
    efficient-estimator hypothesis the statistic is chi-square with four
    degrees of freedom.
    """
    from .validation import as_rst

    d = as_rst(rst_hat).to_array() - as_rst(rst_ref).to_array()
    rst_cov = np.asarray(rst_cov, dtype=float)
    try:
        from scipy.linalg import cholesky, solve_triangular

        cf = cholesky(rst_cov, lower=True)
        w = solve_triangular(cf, d, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularCovariance(
            f"RST covariance is not positive definite: {exc}") from exc
    q = float(w @ w)
    threshold = chi2_quantile_4df(tail)
    return OutlierVerdict(q=q, threshold=threshold, is_outlier=q > threshold)
