import numpy as np
import pytest
from numpy.testing import assert_allclose

from fbmreg import (FullParams, NoiseModel, RstParams, TextureParams,
                    UnknownTestPoint, joint_correlation,
                    noise_variance_for_fragment, simulate_pair)
from fbmreg.simulate import (HYPERION_BAND25_NOISE, LANDSAT8_B1_NOISE,
                             test_point as catalogue_point)

SMALL = FullParams(TextureParams(5.0, 5.0, 0.65, 0.95),
                   RstParams(0.25, 0.25, 0.29670597283903605, 1.025))


def test_same_seed_is_bit_identical():
    a_ref, a_tpl = simulate_pair(SMALL, 7, 5, 1.0, 1.0, seed=123)
    b_ref, b_tpl = simulate_pair(SMALL, 7, 5, 1.0, 1.0, seed=123)
    assert np.array_equal(a_ref.pixels, b_ref.pixels)
    assert np.array_equal(a_tpl.pixels, b_tpl.pixels)


def test_fragments_carry_noise_variance_and_shape():
    ref, tpl = simulate_pair(SMALL, 9, 5, 1.5, 0.5, seed=1)
    assert ref.size == 9 and tpl.size == 5
    assert ref.noise_var == 1.5 ** 2
    assert tpl.noise_var == 0.5 ** 2


def test_mean_offsets_shift_fragments():
    base_ref, base_tpl = simulate_pair(SMALL, 5, 3, 1.0, 1.0, seed=5)
    off_ref, off_tpl = simulate_pair(SMALL, 5, 3, 1.0, 1.0, seed=5,
                                     mean_ri=100.0, mean_ti=-40.0)
    assert_allclose(off_ref.pixels, base_ref.pixels + 100.0)
    assert_allclose(off_tpl.pixels, base_tpl.pixels - 40.0)


def test_origin_pixel_variance_is_noise_only():
    # the texture vanishes at the anchor pixel, only noise remains
    n_ri, n_ti = 7, 5
    draws = 10_000
    center = (n_ri * n_ri - 1) // 2
    values = np.empty(draws)
    for i in range(draws):
        ref, _ = simulate_pair(SMALL, n_ri, n_ti, 1.0, 1.0, seed=[9, i])
        values[i] = ref.to_vector()[center]
    assert abs(values.var() - 1.0) <= 0.05


def test_sample_covariance_matches_model():
    # vectorized batch of draws against the exact matrix, 3-sigma MC bands
    from fbmreg.model import CorrelationEngine

    n_ri, n_ti, draws = 5, 3, 40_000
    engine = CorrelationEngine(n_ri, n_ti, 1.0, 1.0)
    theta = SMALL.to_array()
    lower = engine.cholesky_lower(theta)
    rng = np.random.default_rng(2024)
    z = rng.standard_normal((engine.m, draws))
    y = lower @ z
    sample_cov = (y @ y.T) / draws
    matrix = engine.matrix(theta)
    mc_se = np.sqrt((matrix ** 2 + np.outer(np.diag(matrix), np.diag(matrix)))
                    / draws)
    frac_ok = np.mean(np.abs(sample_cov - matrix) <= 3.0 * mc_se)
    assert frac_ok >= 0.99


def test_seed_isolation():
    draws = 4000
    a = np.empty(draws)
    b = np.empty(draws)
    for i in range(draws):
        ref, _ = simulate_pair(SMALL, 3, 3, 1.0, 1.0, seed=[1, i])
        a[i] = ref.pixels[0, 0]
        ref2, _ = simulate_pair(SMALL, 3, 3, 1.0, 1.0, seed=[2, i])
        b[i] = ref2.pixels[0, 0]
    rho = np.corrcoef(a, b)[0, 1]
    assert abs(rho) < 3.0 / np.sqrt(draws)


# -- test-point catalogue -------------------------------------------------------


def test_catalogue_row_one():
    tp = catalogue_point(1)
    tex, rst = tp.params.texture, tp.params.rst
    assert (tex.sigma_x_ti, tex.hurst, tex.k_rt) == (5.0, 0.65, 0.95)
    assert tp.n_ti == 15 and tp.n_ri == 23
    assert (rst.dt, rst.ds, rst.dr) == (0.25, 0.25, 1.025)
    assert_allclose(np.degrees(rst.alpha), 17.0)


def test_catalogue_small_template_row():
    tp = catalogue_point(3)
    assert tp.n_ti == 9 and tp.n_ri == 17


def test_catalogue_identity_row():
    rst = catalogue_point(10).params.rst
    assert (rst.dt, rst.ds, rst.alpha, rst.dr) == (0.0, 0.0, 0.0, 1.0)


def test_catalogue_conventions():
    for tp_id in range(1, 11):
        tp = catalogue_point(tp_id)
        assert tp.n_ri == tp.n_ti + 8
        assert tp.noise_std_ri == 1.0 and tp.noise_std_ti == 1.0
        assert tp.params.texture.sigma_x_ri == 5.0


@pytest.mark.parametrize("bad", [0, 11, 99, -3, "x", None])
def test_unknown_test_point(bad):
    with pytest.raises(UnknownTestPoint):
        catalogue_point(bad)


# -- signal-dependent noise map --------------------------------------------------


def test_noise_model_zero_intensity():
    model = NoiseModel(sigma_si=2.5, sigma_sd=0.3)
    assert noise_variance_for_fragment(model, 0.0) == 2.5 ** 2


def test_noise_model_hyperion_band25():
    got = noise_variance_for_fragment(HYPERION_BAND25_NOISE, 2000.0)
    assert_allclose(got, 8.3448 ** 2 + 2000.0 * 0.2672 ** 2, rtol=1e-14)


def test_noise_model_landsat_b1():
    got = noise_variance_for_fragment(LANDSAT8_B1_NOISE, 9000.0)
    assert_allclose(got, 9000.0 * 0.1175 ** 2, rtol=1e-14)


def test_noise_model_rejects_negative():
    with pytest.raises(ValueError):
        NoiseModel(sigma_si=-1.0, sigma_sd=0.0)
    with pytest.raises(ValueError):
        noise_variance_for_fragment(NoiseModel(1.0, 1.0), -5.0)
