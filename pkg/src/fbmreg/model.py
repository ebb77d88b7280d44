"""Joint correlation model of a correlated fragment pair.

The noise-free textures are fractional-Brownian-motion fields anchored at
each fragment's central pixel, so every covariance is a three- or four-term
combination of squared distances raised to the power H:

    auto:  0.5 * sx^2 * [|p|^2H + |q|^2H - |p-q|^2H]
    cross: 0.5 * dr^H * [|a-c|^2H + |b|^2H - |c|^2H - |a-b|^2H]

where, for the cross term, a is the reference pixel, b the template pixel
mapped into the reference frame, and c the mapped template origin.  The
joint matrix stacks the reference block, the template block and the
cross-correlation block scaled by k_rt * sx_ri * sx_ti, plus white noise on
the diagonal.

Power conventions: 0^H = 0 for every H in [0, 1], and both x^H*log(x) and
x^(H-1)*0 are taken as 0 at x = 0.  For H > 1/2 these are the exact limits
of the corresponding derivative terms, which keeps the derivative matrices
finite at degenerate geometries (zero translation, coincident lattice
points).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky

from .exceptions import DegenerateModel, NotPositiveDefinite
from .params import PARAM_NAMES, FullParams, fragment_coords
from .transform import rst_inverse
from .validation import as_rst

_RST_NAMES = ("dt", "ds", "alpha", "dr")


def _powh(x, h):
    """x**h elementwise with 0**h := 0 (x is a nonnegative squared distance)."""
    x = np.asarray(x, dtype=float)
    if h > 0:
        return x ** h
    out = np.zeros_like(x)
    np.power(x, h, where=x > 0, out=out)
    return out


def _logx(x):
    """log(x) elementwise with log(0) := 0 (used only against vanishing factors)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    np.log(x, where=x > 0, out=out)
    return out


def auto_covariance(p, q, sigma_x, hurst):
    """Covariance of x(p) - x(0) and x(q) - x(0) for an fBm field x.

    p, q are (t, s) coordinate pairs (scalars or broadcastable arrays).
    Symmetric in (p, q); zero whenever either point is the origin.
    """
    t1, s1 = (np.asarray(c, dtype=float) for c in p)
    t2, s2 = (np.asarray(c, dtype=float) for c in q)
    d1 = t1 * t1 + s1 * s1
    d2 = t2 * t2 + s2 * s2
    d12 = (t1 - t2) ** 2 + (s1 - s2) ** 2
    return 0.5 * sigma_x ** 2 * (_powh(d1, hurst) + _powh(d2, hurst)
                                 - _powh(d12, hurst))


def cross_covariance(ref_point, tpl_point, hurst, rst):
    """Unit-amplitude covariance between a reference and a template increment.

    ref_point is (t_k, s_k) in the reference frame, tpl_point is (u_l, v_l)
    in the template frame.  The template point and the template origin are
    mapped into the reference frame through the inverse transform; the dr^H
    factor accounts for the fBm self-similarity under the scale change.
    Zero whenever the reference point is the origin.
    """
    rst = as_rst(rst)
    tk, sk = (np.asarray(c, dtype=float) for c in ref_point)
    ul, vl = (np.asarray(c, dtype=float) for c in tpl_point)
    tl, sl = rst_inverse(ul, vl, rst)
    t0, s0 = rst_inverse(0.0, 0.0, rst)
    g1 = (tk - t0) ** 2 + (sk - s0) ** 2
    g2 = tl * tl + sl * sl
    g3 = t0 * t0 + s0 * s0
    g4 = (tk - tl) ** 2 + (sk - sl) ** 2
    h = hurst
    return 0.5 * rst.dr ** h * (_powh(g1, h) + _powh(g2, h)
                                - _powh(g3, h) - _powh(g4, h))


@dataclass(frozen=True)
class JointCorrelation:
    """The stacked correlation matrix with its block layout."""

    matrix: np.ndarray
    n_ri: int
    n_ti: int

    @property
    def n_ri_sq(self) -> int:
        return self.n_ri * self.n_ri

    @property
    def ri_block(self) -> np.ndarray:
        return self.matrix[:self.n_ri_sq, :self.n_ri_sq]

    @property
    def ti_block(self) -> np.ndarray:
        return self.matrix[self.n_ri_sq:, self.n_ri_sq:]

    @property
    def cross_block(self) -> np.ndarray:
        return self.matrix[:self.n_ri_sq, self.n_ri_sq:]


class CorrelationEngine:
    """Vectorized builder for the joint matrix and its parameter derivatives.

    Geometry-dependent arrays (squared distances and their logs) are computed
    once; the H-dependent power arrays and the transform-dependent cross-term
    arrays are cached against the most recent parameter values, which makes
    repeated evaluations along an optimizer trajectory cheap.
    """

    def __init__(self, n_ri, n_ti, noise_var_ri=0.0, noise_var_ti=0.0):
        self.n_ri = int(n_ri)
        self.n_ti = int(n_ti)
        self.noise_var_ri = float(noise_var_ri)
        self.noise_var_ti = float(noise_var_ti)
        self.m_ri = self.n_ri ** 2
        self.m_ti = self.n_ti ** 2
        self.m = self.m_ri + self.m_ti
        t, s = fragment_coords(self.n_ri)
        u, v = fragment_coords(self.n_ti)
        self._t, self._s, self._u, self._v = t, s, u, v
        self._a_ri = t * t + s * s
        self._d2_ri = (t[:, None] - t[None, :]) ** 2 + (s[:, None] - s[None, :]) ** 2
        self._a_ti = u * u + v * v
        self._d2_ti = (u[:, None] - u[None, :]) ** 2 + (v[:, None] - v[None, :]) ** 2
        self._log_a_ri = _logx(self._a_ri)
        self._log_d2_ri = _logx(self._d2_ri)
        self._log_a_ti = _logx(self._a_ti)
        self._log_d2_ti = _logx(self._d2_ti)
        self._h_key = None
        self._rst_key = None

    # -- cached parameter-dependent pieces ---------------------------------

    def _update_hurst(self, h):
        if self._h_key == h:
            return
        self._h_key = h
        self._a_ri_h = _powh(self._a_ri, h)
        self._d2_ri_h = _powh(self._d2_ri, h)
        self._a_ti_h = _powh(self._a_ti, h)
        self._d2_ti_h = _powh(self._d2_ti, h)
        self._k_ri = 0.5 * (self._a_ri_h[:, None] + self._a_ri_h[None, :]
                            - self._d2_ri_h)
        self._k_ti = 0.5 * (self._a_ti_h[:, None] + self._a_ti_h[None, :]
                            - self._d2_ti_h)

    def _update_rst(self, h, dt, ds, alpha, dr):
        key = (h, dt, ds, alpha, dr)
        if self._rst_key == key:
            return
        self._rst_key = key
        ca, sa = np.cos(alpha), np.sin(alpha)
        self._ca, self._sa = ca, sa
        tp = (ca * (self._u - dt) - sa * (self._v - ds)) / dr
        sp = (sa * (self._u - dt) + ca * (self._v - ds)) / dr
        t0 = -(dt * ca - ds * sa) / dr
        s0 = -(dt * sa + ds * ca) / dr
        self._tp, self._sp, self._t0, self._s0 = tp, sp, t0, s0
        self._g1 = (self._t - t0) ** 2 + (self._s - s0) ** 2
        self._g2 = tp * tp + sp * sp
        self._g3 = t0 * t0 + s0 * s0
        self._g4 = ((self._t[:, None] - tp[None, :]) ** 2
                    + (self._s[:, None] - sp[None, :]) ** 2)
        self._g1_h = _powh(self._g1, h)
        self._g2_h = _powh(self._g2, h)
        self._g3_h = self._g3 ** h if self._g3 > 0 else 0.0
        self._g4_h = _powh(self._g4, h)
        # grouping keeps the reference-origin row exactly zero in floating
        # point (g1 == g3 and g4 == g2 hold entrywise there)
        self._hrt = (dr ** h / 2.0) * ((self._g1_h - self._g3_h)[:, None]
                                       + (self._g2_h[None, :] - self._g4_h))

    # -- assembly -----------------------------------------------------------

    def matrix(self, theta) -> np.ndarray:
        """Assemble the joint matrix at the 8-parameter vector theta."""
        theta = np.asarray(theta, dtype=float)
        sri, sti, h, k, dt, ds, alpha, dr = theta
        if (self.noise_var_ri == 0.0 and self.noise_var_ti == 0.0
                and abs(k) == 1.0):
            raise DegenerateModel(
                "noise-free fragments with |k_rt| = 1 give a singular model")
        self._update_hurst(h)
        self._update_rst(h, dt, ds, alpha, dr)
        out = np.empty((self.m, self.m))
        ri = out[:self.m_ri, :self.m_ri]
        np.multiply(self._k_ri, sri * sri, out=ri)
        ri.flat[::self.m_ri + 1] += self.noise_var_ri
        ti = out[self.m_ri:, self.m_ri:]
        np.multiply(self._k_ti, sti * sti, out=ti)
        ti.flat[::self.m_ti + 1] += self.noise_var_ti
        cross = out[:self.m_ri, self.m_ri:]
        np.multiply(self._hrt, k * sri * sti, out=cross)
        out[self.m_ri:, :self.m_ri] = cross.T
        return out

    def cholesky_lower(self, theta) -> np.ndarray:
        """Lower Cholesky factor of the joint matrix at theta."""
        mat = self.matrix(theta)
        try:
            return cholesky(mat, lower=True, overwrite_a=True,
                            check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite(
                f"joint correlation matrix is not positive definite: {exc}"
            ) from exc

    def derivative_blocks(self, theta, which):
        """Blocks (D_ri, D_ti, D_cross) of dR/dtheta[which]; None means zero.

        The two diagonal blocks vanish for every RST parameter and for k_rt;
        the cross block carries the geometry chain rule.
        """
        theta = np.asarray(theta, dtype=float)
        sri, sti, h, k, dt, ds, alpha, dr = theta
        self._update_hurst(h)
        self._update_rst(h, dt, ds, alpha, dr)
        if isinstance(which, str):
            which = PARAM_NAMES.index(which)

        if which == 0:    # sigma_x_ri
            return 2.0 * sri * self._k_ri, None, (k * sti) * self._hrt
        if which == 1:    # sigma_x_ti
            return None, 2.0 * sti * self._k_ti, (k * sri) * self._hrt
        if which == 2:    # hurst: differentiate every x^H factor
            ar = self._a_ri_h * self._log_a_ri
            at = self._a_ti_h * self._log_a_ti
            dk_ri = 0.5 * (ar[:, None] + ar[None, :]
                           - self._d2_ri_h * self._log_d2_ri)
            dk_ti = 0.5 * (at[:, None] + at[None, :]
                           - self._d2_ti_h * self._log_d2_ti)
            g3_term = self._g3_h * (np.log(self._g3) if self._g3 > 0 else 0.0)
            dg = ((self._g1_h * _logx(self._g1) - g3_term)[:, None]
                  + ((self._g2_h * _logx(self._g2))[None, :]
                     - self._g4_h * _logx(self._g4)))
            dhrt = np.log(dr) * self._hrt + (dr ** h / 2.0) * dg
            return sri * sri * dk_ri, sti * sti * dk_ti, (k * sri * sti) * dhrt
        if which == 3:    # k_rt
            return None, None, (sri * sti) * self._hrt
        if 4 <= which <= 7:
            dhrt = self._d_hrt_rst(h, dr, _RST_NAMES[which - 4])
            return None, None, (k * sri * sti) * dhrt
        raise ValueError(f"unknown parameter index {which!r}")

    def _d_hrt_rst(self, h, dr, name):
        """d(cross term)/d(rst parameter) via the chain rule on the four
        squared distances; for dr the self-similarity prefactor adds
        (h/dr) times the cross term itself."""
        tp, sp, t0, s0 = self._tp, self._sp, self._t0, self._s0
        ca, sa = self._ca, self._sa
        if name == "dt":
            dtp = dsp = None
            dtp_c, dsp_c = -ca / dr, -sa / dr
            dt0, ds0 = -ca / dr, -sa / dr
        elif name == "ds":
            dtp = dsp = None
            dtp_c, dsp_c = sa / dr, -ca / dr
            dt0, ds0 = sa / dr, -ca / dr
        elif name == "alpha":
            dtp, dsp = -sp, tp
            dtp_c = dsp_c = None
            dt0, ds0 = -s0, t0
        else:  # dr
            dtp, dsp = -tp / dr, -sp / dr
            dtp_c = dsp_c = None
            dt0, ds0 = -t0 / dr, -s0 / dr
        if dtp is None:
            dtp = np.full_like(tp, dtp_c)
            dsp = np.full_like(sp, dsp_c)

        g1_m1 = _powh(self._g1, h - 1.0)
        g2_m1 = _powh(self._g2, h - 1.0)
        g3_m1 = self._g3 ** (h - 1.0) if self._g3 > 0 else 0.0
        g4_m1 = _powh(self._g4, h - 1.0)
        term_k = -g1_m1 * (dt0 * (self._t - t0) + ds0 * (self._s - s0))
        term_l = g2_m1 * (dtp * tp + dsp * sp)
        term_0 = -(g3_m1 * (dt0 * t0 + ds0 * s0))
        term_kl = g4_m1 * (dtp[None, :] * (self._t[:, None] - tp[None, :])
                           + dsp[None, :] * (self._s[:, None] - sp[None, :]))
        out = h * dr ** h * ((term_k + term_0)[:, None]
                             + (term_l[None, :] + term_kl))
        if name == "dr":
            out += (h / dr) * self._hrt
        return out

    def derivative(self, theta, which) -> np.ndarray:
        """Full dR/dtheta[which] matrix assembled from its blocks."""
        d_ri, d_ti, d_cross = self.derivative_blocks(theta, which)
        out = np.zeros((self.m, self.m))
        if d_ri is not None:
            out[:self.m_ri, :self.m_ri] = d_ri
        if d_ti is not None:
            out[self.m_ri:, self.m_ri:] = d_ti
        if d_cross is not None:
            out[:self.m_ri, self.m_ri:] = d_cross
            out[self.m_ri:, :self.m_ri] = d_cross.T
        return out


def _theta_of(params) -> np.ndarray:
    if isinstance(params, FullParams):
        return params.to_array()
    return FullParams.from_array(params).to_array()


def joint_correlation(params, n_ri, n_ti, noise_var_ri=0.0,
                      noise_var_ti=0.0) -> JointCorrelation:
    """Build the joint correlation matrix of a stacked fragment pair."""
    engine = CorrelationEngine(n_ri, n_ti, noise_var_ri, noise_var_ti)
    return JointCorrelation(engine.matrix(_theta_of(params)), engine.n_ri,
                            engine.n_ti)


def d_joint_correlation(params, which, n_ri, n_ti) -> np.ndarray:
    """Analytic derivative of the joint matrix w.r.t. one parameter.

    which: a name from PARAM_NAMES or an index 0..7.
    """
    engine = CorrelationEngine(n_ri, n_ti)
    return engine.derivative(_theta_of(params), which)
