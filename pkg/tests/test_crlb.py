import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fbmreg import (FullParams, RstParams, SingularCovariance, SingularFim,
                    TextureParams, chi2_cdf_4df, chi2_quantile_4df, crlb,
                    fisher_information, outlier_test)
from fbmreg.simulate import test_point as catalogue_point

TP1 = catalogue_point(1)
TP5 = catalogue_point(5)


def test_fim_symmetric_and_psd_on_catalogue():
    for tp_id in (1, 2, 5, 9, 10):
        tp = catalogue_point(tp_id)
        info = fisher_information(tp.params, tp.n_ri, tp.n_ti,
                                  tp.noise_std_ri ** 2, tp.noise_std_ti ** 2)
        assert np.abs(info - info.T).max() <= 1e-10 * np.abs(info).max()
        assert np.linalg.eigvalsh(info)[0] >= -1e-8 * np.abs(info).max()


def test_zero_correlation_zeroes_transform_information():
    params = FullParams(TextureParams(5.0, 5.0, 0.65, 0.0),
                        TP1.params.rst)
    info = fisher_information(params, 9, 7, 1.0, 1.0)
    assert_allclose(info[4:, :], 0.0, atol=1e-12)
    assert_allclose(info[:, 4:], 0.0, atol=1e-12)
    with pytest.raises(SingularFim):
        crlb(params, 9, 7, 1.0, 1.0)


def test_fim_matches_finite_difference_trace_oracle():
    # rebuild the trace formula from numerically differenced matrices
    from fbmreg.model import CorrelationEngine

    tp = TP5
    theta = tp.params.to_array()
    n_ri, n_ti = 9, 7
    engine = CorrelationEngine(n_ri, n_ti, 1.0, 1.0)
    matrix = engine.matrix(theta)
    inv = np.linalg.inv(matrix)
    diffs = []
    for i in range(8):
        h = 1e-5 * max(1.0, abs(theta[i]))
        plus = theta.copy()
        plus[i] += h
        minus = theta.copy()
        minus[i] -= h
        diffs.append((engine.matrix(plus) - engine.matrix(minus)) / (2 * h))
    expected = np.zeros((8, 8))
    for i in range(8):
        for j in range(8):
            expected[i, j] = 0.5 * np.trace(diffs[i] @ inv @ diffs[j] @ inv)
    got = fisher_information(tp.params, n_ri, n_ti, 1.0, 1.0)
    assert_allclose(got, expected, rtol=1e-4, atol=1e-4 * np.abs(expected).max())


def test_crlb_spot_values_from_published_table():
    # full ten-row sweep lives in the acceptance suite
    for tp_id, expected in [(1, (0.048, 0.049, 0.447, 0.008)),
                            (2, (0.130, 0.133, 1.208, 0.023))]:
        tp = catalogue_point(tp_id)
        result = crlb(tp.params, tp.n_ri, tp.n_ti, 1.0, 1.0)
        assert_allclose(result.sigma_rst, expected, rtol=0.05)


def test_sigma_rst_comes_from_full_inverse():
    # texture nuisance parameters must inflate the transform bound
    tp = TP1
    result = crlb(tp.params, tp.n_ri, tp.n_ti, 1.0, 1.0)
    info = fisher_information(tp.params, tp.n_ri, tp.n_ti, 1.0, 1.0)
    rst_only = np.sqrt(np.diag(np.linalg.inv(info[4:, 4:])))
    assert np.all(result.sigma_theta[4:] >= rst_only - 1e-12)
    assert np.any(result.sigma_theta[4:] > rst_only * 1.0001)


def test_noise_monotonicity():
    tp = TP1
    base = crlb(tp.params, tp.n_ri, tp.n_ti, 1.0, 1.0).sigma_rst
    noisy = crlb(tp.params, tp.n_ri, tp.n_ti, 4.0, 4.0).sigma_rst
    assert np.all(noisy > base)


def test_correlation_monotonicity():
    strong = crlb(TP1.params, TP1.n_ri, TP1.n_ti, 1.0, 1.0).sigma_rst
    tp2 = catalogue_point(2)
    weak = crlb(tp2.params, tp2.n_ri, tp2.n_ti, 1.0, 1.0).sigma_rst
    assert np.all(weak > strong)


def test_pure_scaling_point_is_symmetric_in_translation():
    # axis-swap symmetry of the zero-translation, zero-rotation geometry
    tp = catalogue_point(9)
    result = crlb(tp.params, tp.n_ri, tp.n_ti, 1.0, 1.0)
    assert_allclose(result.sigma_rst[0], result.sigma_rst[1], rtol=1e-9)


# -- chi-square with 4 degrees of freedom -----------------------------------


def test_chi2_cdf_known_values():
    # P(Q <= q) = 1 - exp(-q/2) * (1 + q/2)
    assert chi2_cdf_4df(0.0) == 0.0
    assert_allclose(chi2_cdf_4df(2.0), 1 - math.exp(-1.0) * 2.0, rtol=1e-14)


def test_quantile_round_trip():
    for tail in (0.5, 0.1, 0.01, 1e-4, 1e-6, 1e-9):
        q = chi2_quantile_4df(tail)
        assert abs((1.0 - chi2_cdf_4df(q)) - tail) <= 1e-9 * tail + 1e-15


def test_threshold_reproduces_published_value():
    assert abs(chi2_quantile_4df(1e-6) - 33.3768) <= 1e-3


def test_quantile_rejects_bad_tail():
    with pytest.raises(ValueError):
        chi2_quantile_4df(0.0)
    with pytest.raises(ValueError):
        chi2_quantile_4df(1.5)


# -- outlier test -------------------------------------------------------------


def test_outlier_zero_deviation():
    cov = np.diag([0.01, 0.01, 0.001, 1e-4])
    rst = RstParams(0.25, 0.25, 0.3, 1.025)
    verdict = outlier_test(rst, rst, cov)
    assert verdict.q == 0.0
    assert not verdict.is_outlier


def test_outlier_identity_covariance_quadratic_form():
    ref = RstParams.identity()
    hat = RstParams(6.0, 0.0, 0.0, 1.0)
    verdict = outlier_test(hat, ref, np.eye(4))
    assert_allclose(verdict.q, 36.0, rtol=1e-12)
    assert verdict.is_outlier


def test_outlier_singular_covariance():
    with pytest.raises(SingularCovariance):
        outlier_test(RstParams.identity(), RstParams.identity(),
                     np.zeros((4, 4)))
