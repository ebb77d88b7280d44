import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fbmreg import (Fragment, FullParams, RstParams, TextureParams,
                    estimate_central_values, initial_texture_guess,
                    joint_correlation, log_likelihood)
from fbmreg.likelihood import LikelihoodWorkspace, increment_std
from fbmreg.simulate import simulate_pair, test_point as catalogue_point

TP1 = catalogue_point(1)


def tp1_style_params(rst=None):
    return FullParams(
        TextureParams(sigma_x_ri=5.0, sigma_x_ti=5.0, hurst=0.65, k_rt=0.95),
        rst if rst is not None else RstParams(0.25, 0.25, math.radians(17.0),
                                              1.025))


def random_pair(n_ri, n_ti, seed, noise_var=1.0):
    rng = np.random.default_rng(seed)
    ref = Fragment(rng.standard_normal((n_ri, n_ri)), noise_var=noise_var)
    tpl = Fragment(rng.standard_normal((n_ti, n_ti)), noise_var=noise_var)
    return ref, tpl


def dense_log_lf(y, matrix, m_ri, x_ri0, x_ti0):
    """Independent evaluation: explicit inverse and slogdet."""
    dy = y.copy()
    dy[:m_ri] -= x_ri0
    dy[m_ri:] -= x_ti0
    inv = np.linalg.inv(matrix)
    _, logdet = np.linalg.slogdet(matrix)
    return -0.5 * (dy @ inv @ dy + logdet)


# -- central-value elimination -------------------------------------------------


def test_white_noise_center_values_are_means():
    ref, tpl = random_pair(5, 3, seed=0)
    y = np.concatenate([ref.to_vector(), tpl.to_vector()])
    params = FullParams(TextureParams(0.0, 0.0, 0.5, 0.0), RstParams.identity())
    joint = joint_correlation(params, 5, 3, 2.0, 2.0)   # 2 * identity
    central = estimate_central_values(y, joint)
    assert_allclose(central.x_ri0, ref.pixels.mean(), rtol=1e-12)
    assert_allclose(central.x_ti0, tpl.pixels.mean(), rtol=1e-12)


def test_orthogonal_sample_gives_zero_center_values():
    params = tp1_style_params()
    joint = joint_correlation(params, 5, 3, 1.0, 1.0)
    inv = np.linalg.inv(joint.matrix)
    e1 = np.concatenate([np.ones(25), np.zeros(9)])
    e2 = np.concatenate([np.zeros(25), np.ones(9)])
    rng = np.random.default_rng(1)
    y = rng.standard_normal(34)
    # project out the indicator directions under the R^-1 inner product
    basis = np.column_stack([e1, e2])
    coeffs = np.linalg.solve(basis.T @ inv @ basis, basis.T @ inv @ y)
    y_centered = y - basis @ coeffs
    central = estimate_central_values(y_centered, joint)
    assert_allclose([central.x_ri0, central.x_ti0], 0.0, atol=1e-10)


def test_center_values_match_grid_search_oracle():
    params = tp1_style_params()
    ref, tpl = simulate_pair(params, 3, 3, 1.0, 1.0, seed=42,
                             mean_ri=7.0, mean_ti=-3.0)
    y = np.concatenate([ref.to_vector(), tpl.to_vector()])
    joint = joint_correlation(params, 3, 3, 1.0, 1.0)
    central = estimate_central_values(y, joint)

    # refining 2-D grid maximization of the log-likelihood
    best = (0.0, 0.0)
    width = 20.0
    for _ in range(5):
        g1 = np.linspace(best[0] - width, best[0] + width, 21)
        g2 = np.linspace(best[1] - width, best[1] + width, 21)
        values = np.array([[dense_log_lf(y, joint.matrix, 9, a, b)
                            for b in g2] for a in g1])
        i, j = np.unravel_index(np.argmax(values), values.shape)
        best = (g1[i], g2[j])
        width /= 10.0
    assert abs(central.x_ri0 - best[0]) <= 1e-4
    assert abs(central.x_ti0 - best[1]) <= 1e-4


# -- log-likelihood -------------------------------------------------------------


def single_fragment_log_lf(fragment, sigma_x, hurst):
    """Independent one-fragment evaluation with center elimination."""
    from fbmreg import auto_covariance, fragment_coords

    n = fragment.size
    t, s = fragment_coords(n)
    matrix = auto_covariance((t[:, None], s[:, None]), (t[None, :], s[None, :]),
                             sigma_x, hurst) + fragment.noise_var * np.eye(n * n)
    inv = np.linalg.inv(matrix)
    y = fragment.to_vector()
    ones = np.ones(n * n)
    x0 = (ones @ inv @ y) / (ones @ inv @ ones)
    dy = y - x0
    _, logdet = np.linalg.slogdet(matrix)
    return -0.5 * (dy @ inv @ dy + logdet)


def test_uncorrelated_pair_decomposes_into_fragment_terms():
    params = tp1_style_params()
    params = FullParams(
        TextureParams(5.0, 5.0, 0.65, 0.0), params.rst)
    ref, tpl = simulate_pair(params, 7, 5, 1.0, 1.0, seed=3)
    joint_eval = log_likelihood(ref, tpl, params)
    separate = (single_fragment_log_lf(ref, 5.0, 0.65)
                + single_fragment_log_lf(tpl, 5.0, 0.65))
    assert_allclose(joint_eval.log_lf, separate, rtol=1e-10)


def test_uncorrelated_log_lf_constant_in_transform():
    texture = TextureParams(5.0, 5.0, 0.65, 0.0)
    ref, tpl = simulate_pair(FullParams(texture, RstParams.identity()),
                             7, 5, 1.0, 1.0, seed=4)
    rng = np.random.default_rng(8)
    values = []
    for _ in range(10):
        rst = RstParams(dt=rng.uniform(-1, 1), ds=rng.uniform(-1, 1),
                        alpha=rng.uniform(-1, 1), dr=rng.uniform(0.6, 1.6))
        values.append(log_likelihood(ref, tpl, FullParams(texture, rst)).log_lf)
    assert max(values) - min(values) <= 1e-9


def test_log_lf_matches_dense_inverse_oracle():
    params = tp1_style_params()
    ref, tpl = simulate_pair(params, 3, 3, 1.0, 1.0, seed=5)
    result = log_likelihood(ref, tpl, params)
    y = np.concatenate([ref.to_vector(), tpl.to_vector()])
    joint = joint_correlation(params, 3, 3, 1.0, 1.0)
    expected = dense_log_lf(y, joint.matrix, 9, result.central.x_ri0,
                            result.central.x_ti0)
    assert_allclose(result.log_lf, expected, rtol=1e-8)


def test_analytic_gradient_matches_finite_differences():
    params = tp1_style_params()
    ref, tpl = simulate_pair(params, 9, 7, 1.0, 1.0, seed=6)
    ws = LikelihoodWorkspace(ref, tpl)
    theta = params.to_array() * [1.05, 0.9, 0.98, 0.97, 1.4, 0.6, 1.1, 0.99]
    value, grad = ws.value_and_grad(theta)
    fd = np.zeros(8)
    for i in range(8):
        h = 1e-6 * max(1.0, abs(theta[i]))
        plus = theta.copy()
        plus[i] += h
        minus = theta.copy()
        minus[i] -= h
        fd[i] = (ws.value(plus) - ws.value(minus)) / (2 * h)
    assert_allclose(grad, fd, rtol=2e-6, atol=1e-7 * np.abs(fd).max())


# -- initial guesses -------------------------------------------------------------


def test_constant_fragment_has_zero_increment_std():
    assert increment_std(np.full((5, 5), 3.7)) == 0.0


def test_checkerboard_increment_std():
    i, j = np.indices((7, 7))
    board = np.where((i + j) % 2 == 0, 1.0, -1.0)
    assert_allclose(increment_std(board), 2.0)


def test_constant_fragments_guess_is_floored():
    ref = Fragment(np.full((5, 5), 1.0), noise_var=1.0)
    tpl = Fragment(np.full((3, 3), 2.0), noise_var=1.0)
    guess = initial_texture_guess(ref, tpl)
    assert guess.sigma_x_ri == 1e-6
    assert guess.sigma_x_ti == 1e-6
    assert guess.hurst == 0.5
    assert guess.k_rt == 0.0


def test_hurst_guess_is_midrange():
    ref, tpl = random_pair(7, 5, seed=9)
    assert initial_texture_guess(ref, tpl).hurst == 0.5


def test_amplitude_guess_recovers_truth_on_simulated_pairs():
    trials = 200
    within = 0
    for trial in range(trials):
        ref, tpl = TP1.simulate(seed=[202, trial])
        guess = initial_texture_guess(ref, tpl, TP1.params.rst)
        if 3.0 <= guess.sigma_x_ri <= 7.0:
            within += 1
    assert within >= 0.95 * trials


def test_correlation_guess_sees_strong_correlation():
    ref, tpl = TP1.simulate(seed=77)
    guess = initial_texture_guess(ref, tpl, TP1.params.rst)
    assert guess.k_rt > 0.5


def test_likelihood_path_has_no_resampling_dependency():
    # the estimator must never interpolate pixel data
    import inspect

    import fbmreg.likelihood as likelihood_module

    source = inspect.getsource(likelihood_module)
    assert "similarity" not in source
    assert "interpolate" not in source
