"""Registration estimators with a scikit-learn style fit interface.

``MlFbmEstimator`` maximizes the concentrated fragment-pair log-likelihood
over all eight model parameters; ``NccEstimator`` and ``SsdEstimator``
optimize interpolation-based similarity scores over the four transform
parameters.  All three share the same multi-start scheme: nine launches
with the translation start offset by {-1, 0, 1} pixels on each axis, the
best final objective winning (ties go to the lowest start index, for
determinism).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator
from threadpoolctl import threadpool_limits

from .exceptions import AllStartsFailed, FbmregError
from .likelihood import CentralValues, LikelihoodWorkspace, initial_texture_guess
from .params import FullParams, RstParams
from .similarity import ReferenceInterpolator, ncc_score, ssd_score
from .transform import rst_forward
from .validation import as_rst, check_pair

DR_BOUNDS = (0.5, 2.0)
START_OFFSETS = tuple((dt, ds) for dt in (-1.0, 0.0, 1.0)
                      for ds in (-1.0, 0.0, 1.0))
_PENALTY = 1e12


@dataclass(frozen=True)
class MlEstimate:
    """Result of one maximum-likelihood registration."""

    params_hat: FullParams
    central: CentralValues
    log_lf_at_opt: float
    start_index: int
    iterations: int
    converged: bool

    @property
    def rst_hat(self) -> RstParams:
        return self.params_hat.rst


@dataclass(frozen=True)
class SimilarityEstimate:
    """Result of one similarity-measure registration."""

    rst_hat: RstParams
    score_at_opt: float
    start_index: int
    converged: bool


class _MultiStartMixin:
    """Shared nine-start SLSQP driver."""

    def _run_starts(self, objective, jac, make_x0, bounds, rst_init):
        best = None
        failures = []
        # small dense factorizations run faster single-threaded
        with threadpool_limits(limits=1):
            for index, (off_t, off_s) in enumerate(START_OFFSETS):
                x0 = make_x0(rst_init, off_t, off_s)
                try:
                    res = minimize(objective, x0, jac=jac, method="SLSQP",
                                   bounds=bounds,
                                   options={"maxiter": self.max_iter,
                                            "ftol": self.ftol})
                except (FbmregError, np.linalg.LinAlgError) as exc:
                    failures.append(f"start {index}: {exc}")
                    continue
                if not np.isfinite(res.fun) or res.fun >= _PENALTY / 2:
                    failures.append(f"start {index}: no feasible point "
                                    f"(status {res.status}: {res.message})")
                    continue
                if best is None or -res.fun > best[0] + 1e-9:
                    best = (-res.fun, res, index)
        if best is None:
            raise AllStartsFailed("all nine starts failed:\n  "
                                  + "\n  ".join(failures))
        return best

    def transform(self, points):
        """Map reference (t, s) points to template coordinates with the
        fitted transform.  points: array-like of shape (n, 2)."""
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "rst_")
        points = np.asarray(points, dtype=float)
        u, v = rst_forward(points[..., 0], points[..., 1], self.rst_)
        return np.stack([u, v], axis=-1)


class MlFbmEstimator(_MultiStartMixin, BaseEstimator):
    """Maximum-likelihood registration under the fBm texture model.

    Parameters
    ----------
    dr_bounds : (float, float), default (0.5, 2.0)
        Box constraint on the scaling factor.
    ftol : float, default 1e-8
        Log-likelihood change tolerance per start.
    max_iter : int, default 200
        Iteration cap per start.
    gradient : {'analytic', 'fd'}, default 'analytic'
        Gradient supply for the optimizer.  'fd' uses forward differences
        with a 1e-5 relative step.
    fd_step : float, default 1e-5
        Relative step for the 'fd' gradient.

    Attributes (after fit)
    ----------------------
    params_ : FullParams           estimated texture + transform parameters
    rst_ : RstParams               the transform part of params_
    texture_ : TextureParams       the texture part of params_
    central_ : CentralValues       eliminated central-pixel values
    log_lf_ : float                log-likelihood at the optimum
    start_index_ : int             which of the nine starts won
    n_iter_ : int                  optimizer iterations of the winning start
    converged_ : bool              winning start met its tolerances
    result_ : MlEstimate           all of the above in one record
    """

    def __init__(self, dr_bounds=DR_BOUNDS, ftol=1e-8, max_iter=200,
                 gradient="analytic", fd_step=1e-5):
        self.dr_bounds = dr_bounds
        self.ftol = ftol
        self.max_iter = max_iter
        self.gradient = gradient
        self.fd_step = fd_step

    def fit(self, reference, template, rst_init=None):
        """Register template to reference starting from rst_init
        (identity transform when omitted)."""
        reference, template = check_pair(reference, template)
        rst_init = as_rst(rst_init) if rst_init is not None else RstParams.identity()
        if self.gradient not in ("analytic", "fd"):
            raise ValueError(f"gradient must be 'analytic' or 'fd', "
                             f"got {self.gradient!r}")
        ws = LikelihoodWorkspace(reference, template)
        texture0 = initial_texture_guess(reference, template, rst_init)

        def objective(x):
            try:
                return -ws.value(x)
            except FbmregError:
                return _PENALTY

        if self.gradient == "analytic":
            def jac(x):
                try:
                    _, grad = ws.value_and_grad(x)
                    return -grad
                except FbmregError:
                    return np.zeros_like(x)
        else:
            def jac(x):
                f0 = objective(x)
                grad = np.zeros_like(x)
                for i in range(x.size):
                    step = self.fd_step * max(1.0, abs(x[i]))
                    x_step = x.copy()
                    x_step[i] += step
                    grad[i] = (objective(x_step) - f0) / step
                return grad

        bounds = [(0.0, None), (0.0, None), (0.0, 1.0), (-1.0, 1.0),
                  (None, None), (None, None), (None, None),
                  tuple(self.dr_bounds)]

        def make_x0(rst, off_t, off_s):
            return np.concatenate([
                texture0.to_array(),
                [rst.dt + off_t, rst.ds + off_s, rst.alpha, rst.dr]])

        log_lf, res, index = self._run_starts(objective, jac, make_x0,
                                              bounds, rst_init)
        params = FullParams.from_array(self._clip_to_bounds(res.x, bounds))
        theta = params.to_array()
        self.params_ = params
        self.rst_ = params.rst
        self.texture_ = params.texture
        self.central_ = ws.central_values(theta)
        self.log_lf_ = float(ws.value(theta))
        self.start_index_ = index
        self.n_iter_ = int(res.nit)
        self.converged_ = bool(res.success)
        self.result_ = MlEstimate(params_hat=params, central=self.central_,
                                  log_lf_at_opt=self.log_lf_,
                                  start_index=index, iterations=self.n_iter_,
                                  converged=self.converged_)
        return self

    @staticmethod
    def _clip_to_bounds(x, bounds):
        # SLSQP can overstep a bound by a few ulps
        out = x.copy()
        for i, (lo, hi) in enumerate(bounds):
            if lo is not None:
                out[i] = max(out[i], lo)
            if hi is not None:
                out[i] = min(out[i], hi)
        return out


class _SimilarityEstimatorBase(_MultiStartMixin, BaseEstimator):
    """Nine-start optimization of an interpolation-based similarity score."""

    _sign = 1.0  # multiply the score by -_sign to get the minimized objective

    def __init__(self, dr_bounds=DR_BOUNDS, ftol=1e-8, max_iter=200):
        self.dr_bounds = dr_bounds
        self.ftol = ftol
        self.max_iter = max_iter

    def _score(self, reference, template, rst, interp):
        raise NotImplementedError

    def fit(self, reference, template, rst_init=None):
        """Register template to reference starting from rst_init
        (identity transform when omitted)."""
        reference, template = check_pair(reference, template)
        rst_init = as_rst(rst_init) if rst_init is not None else RstParams.identity()
        interp = ReferenceInterpolator(reference)

        def objective(x):
            try:
                score = self._score(reference, template, x, interp)
            except FbmregError:
                return _PENALTY
            return -self._sign * score

        bounds = [(None, None), (None, None), (None, None),
                  tuple(self.dr_bounds)]

        def make_x0(rst, off_t, off_s):
            return np.array([rst.dt + off_t, rst.ds + off_s,
                             rst.alpha, rst.dr])

        neg_best, res, index = self._run_starts(objective, None, make_x0,
                                                bounds, rst_init)
        x = MlFbmEstimator._clip_to_bounds(res.x, bounds)
        self.rst_ = RstParams.from_array(x)
        self.score_ = float(self._sign * -res.fun)
        self.start_index_ = index
        self.n_iter_ = int(res.nit)
        self.converged_ = bool(res.success)
        self.result_ = SimilarityEstimate(rst_hat=self.rst_,
                                          score_at_opt=self.score_,
                                          start_index=index,
                                          converged=self.converged_)
        return self


class NccEstimator(_SimilarityEstimatorBase):
    """Normalized-cross-correlation registration (score maximized)."""

    _sign = 1.0

    def _score(self, reference, template, rst, interp):
        return ncc_score(reference, template, rst, interp)


class SsdEstimator(_SimilarityEstimatorBase):
    """Sum-of-squared-differences registration (score minimized)."""

    _sign = -1.0

    def _score(self, reference, template, rst, interp):
        return ssd_score(reference, template, rst, interp)


def estimate_ml(reference, template, rst_initial, **options) -> MlEstimate:
    """Functional wrapper around MlFbmEstimator."""
    est = MlFbmEstimator(**options)
    est.fit(reference, template, rst_init=rst_initial)
    return est.result_


def estimate_baseline(reference, template, rst_initial,
                      measure: str = "ncc", **options) -> SimilarityEstimate:
    """Functional wrapper around the NCC / SSD estimators."""
    cls = {"ncc": NccEstimator, "ssd": SsdEstimator}.get(measure.lower())
    if cls is None:
        raise ValueError(f"measure must be 'ncc' or 'ssd', got {measure!r}")
    est = cls(**options)
    est.fit(reference, template, rst_init=rst_initial)
    return est.result_
