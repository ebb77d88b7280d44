"""Log-likelihood of a fragment pair with central-value elimination.

The unknown true central intensities of the two fragments enter the model
only as constant offsets of the stacked sample.  For any fixed parameter
vector they have a closed-form generalized-least-squares solution, which is
substituted back before evaluating

    log L = -0.5 * (dY' R^-1 dY + log|R|)        (constant dropped).

All linear algebra goes through one Cholesky factorization per parameter
point.  ``LikelihoodWorkspace`` keeps that factorization and the model
caches alive across evaluations, and supplies the analytic gradient of the
concentrated log-likelihood (the center-value estimates are stationary, so
their dependence on the parameters contributes nothing).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.linalg.lapack import dpotri

from .exceptions import SingularSystem
from .model import CorrelationEngine, JointCorrelation
from .params import FullParams, TextureParams
from .validation import as_rst, check_pair


@dataclass(frozen=True)
class CentralValues:
    """GLS estimates of the true central pixel of each fragment."""

    x_ri0: float
    x_ti0: float


@dataclass(frozen=True)
class LikelihoodEval:
    """One log-likelihood evaluation."""

    log_lf: float
    central: CentralValues
    params: FullParams


def estimate_central_values(y_sigma, joint: JointCorrelation) -> CentralValues:
    """Solve the 2x2 GLS system for the two central-pixel offsets.

    y_sigma is the stacked (reference, template) sample vector; the design
    columns are the two block indicator vectors.
    """
    from scipy.linalg import cholesky

    y = np.asarray(y_sigma, dtype=float)
    m_ri = joint.n_ri_sq
    cf = cholesky(joint.matrix, lower=True, check_finite=False)
    m_hat, _, _ = _gls_center(cf, y, m_ri)
    return CentralValues(float(m_hat[0]), float(m_hat[1]))


def _gls_center(cf, y, m_ri):
    """Whitened GLS of y on the two block indicators.

    Returns (m_hat, whitened residual L^-1(y - A m_hat), log|R|).
    """
    m = y.shape[0]
    basis = np.zeros((m, 3))
    basis[:, 0] = y
    basis[:m_ri, 1] = 1.0
    basis[m_ri:, 2] = 1.0
    w = solve_triangular(cf, basis, lower=True, check_finite=False)
    wy, w1, w2 = w[:, 0], w[:, 1], w[:, 2]
    g11, g12, g22 = w1 @ w1, w1 @ w2, w2 @ w2
    det = g11 * g22 - g12 * g12
    if not np.isfinite(det) or det <= 1e-14 * max(g11 * g22, 1e-300):
        raise SingularSystem(
            "center-value elimination system is numerically singular")
    rhs1, rhs2 = w1 @ wy, w2 @ wy
    m_hat = np.array([(g22 * rhs1 - g12 * rhs2) / det,
                      (g11 * rhs2 - g12 * rhs1) / det])
    resid_w = wy - w[:, 1:] @ m_hat
    log_det = 2.0 * np.sum(np.log(np.diag(cf)))
    return m_hat, resid_w, log_det


class LikelihoodWorkspace:
    """Reusable log-likelihood evaluator for one fragment pair.

    Evaluations are memoized on the exact parameter vector, so an optimizer
    asking for the value and then the gradient at the same point pays for a
    single factorization.
    """

    def __init__(self, reference, template):
        reference, template = check_pair(reference, template)
        self.reference = reference
        self.template = template
        self.engine = CorrelationEngine(reference.size, template.size,
                                        reference.noise_var, template.noise_var)
        self.y = np.concatenate([reference.to_vector(), template.to_vector()])
        self._key = None

    def _evaluate(self, theta):
        key = theta.tobytes()
        if self._key == key:
            return
        cf = self.engine.cholesky_lower(theta)
        m_hat, resid_w, log_det = _gls_center(cf, self.y, self.engine.m_ri)
        self._cf = cf
        self._m_hat = m_hat
        self._resid_w = resid_w
        self._log_lf = -0.5 * (resid_w @ resid_w + log_det)
        self._key = key

    def value(self, theta) -> float:
        """log L at the 8-parameter vector theta."""
        self._evaluate(np.asarray(theta, dtype=float))
        return self._log_lf

    def central_values(self, theta) -> CentralValues:
        self._evaluate(np.asarray(theta, dtype=float))
        return CentralValues(float(self._m_hat[0]), float(self._m_hat[1]))

    def value_and_grad(self, theta):
        """log L and its analytic 8-gradient at theta.

        d log L / d theta_i = 0.5 * (a' D_i a - tr(R^-1 D_i)) with
        a = R^-1 dY; block structure of each D_i keeps the products cheap.
        """
        theta = np.asarray(theta, dtype=float)
        self._evaluate(theta)
        cf = self._cf
        m_ri = self.engine.m_ri
        a = solve_triangular(cf, self._resid_w, lower=True, trans="T",
                             check_finite=False)
        a1, a2 = a[:m_ri], a[m_ri:]
        rinv, info = dpotri(cf, lower=True)
        if info != 0:
            raise SingularSystem(f"inverse from Cholesky factor failed ({info})")
        rinv = rinv + np.tril(rinv, -1).T
        p11 = rinv[:m_ri, :m_ri]
        p12 = rinv[:m_ri, m_ri:]
        p22 = rinv[m_ri:, m_ri:]

        grad = np.zeros(theta.shape[0])
        for i in range(theta.shape[0]):
            d_ri, d_ti, d_cross = self.engine.derivative_blocks(theta, i)
            quad = 0.0
            trace = 0.0
            if d_ri is not None:
                quad += a1 @ d_ri @ a1
                trace += np.sum(p11 * d_ri)
            if d_ti is not None:
                quad += a2 @ d_ti @ a2
                trace += np.sum(p22 * d_ti)
            if d_cross is not None:
                quad += 2.0 * (a1 @ d_cross @ a2)
                trace += 2.0 * np.sum(p12 * d_cross)
            grad[i] = 0.5 * (quad - trace)
        return self._log_lf, grad


def log_likelihood(reference, template, params) -> LikelihoodEval:
    """Evaluate the concentrated log-likelihood of a fragment pair."""
    if not isinstance(params, FullParams):
        params = FullParams.from_array(params)
    ws = LikelihoodWorkspace(reference, template)
    theta = params.to_array()
    value = ws.value(theta)
    return LikelihoodEval(log_lf=float(value), central=ws.central_values(theta),
                          params=params)


def increment_std(pixels) -> float:
    """STD of the unity-lag increments, averaged over both axes (no floor)."""
    pixels = np.asarray(pixels, dtype=float)
    d_vert = np.diff(pixels, axis=0)
    d_horz = np.diff(pixels, axis=1)
    return float(np.sqrt(0.5 * (d_vert.var() + d_horz.var())))


SIGMA_X_FLOOR = 1e-6


def initial_texture_guess(reference, template, rst_initial=None) -> TextureParams:
    """Data-driven starting point for the texture parameters.

    Amplitudes come from the unity-lag increment STDs (floored at
    SIGMA_X_FLOOR so the optimizer never starts on the sigma_x = 0
    boundary), the roughness exponent starts at the middle of its range,
    and the correlation starts at the sample correlation over the
    nearest-integer-aligned overlap under ``rst_initial`` (clipped just
    inside +-1, again to stay off the boundary).
    """
    reference, template = check_pair(reference, template)
    if reference.size < 2 or template.size < 2:
        raise ValueError("fragments must be at least 2x2 for increment STDs")
    rst_initial = as_rst(rst_initial) if rst_initial is not None else None
    sigma_ri = max(increment_std(reference.pixels), SIGMA_X_FLOOR)
    sigma_ti = max(increment_std(template.pixels), SIGMA_X_FLOOR)
    if rst_initial is None:
        from .params import RstParams

        rst_initial = RstParams.identity()
    k0 = _sample_correlation(reference, template, rst_initial)
    return TextureParams(sigma_x_ri=sigma_ri, sigma_x_ti=sigma_ti,
                         hurst=0.5, k_rt=k0)


def _sample_correlation(reference, template, rst) -> float:
    """Pearson correlation over the nearest-integer-aligned overlap."""
    from .params import fragment_coords
    from .transform import rst_inverse

    u, v = fragment_coords(template.size)
    tp, sp = rst_inverse(u, v, rst)
    ti = np.rint(tp).astype(int)
    si = np.rint(sp).astype(int)
    h = reference.half
    inside = (np.abs(ti) <= h) & (np.abs(si) <= h)
    if inside.sum() < 3:
        return 0.0
    tpl_vals = template.to_vector()[inside]
    ref_vals = reference.pixels[ti[inside] + h, si[inside] + h]
    if tpl_vals.std() == 0.0 or ref_vals.std() == 0.0:
        return 0.0
    rho = float(np.corrcoef(tpl_vals, ref_vals)[0, 1])
    return float(np.clip(rho, -0.99, 0.99))
