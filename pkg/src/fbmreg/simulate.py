"""Correlated fragment-pair simulator and the benchmark test-point catalogue.

Pairs are drawn with exact joint statistics: one Cholesky factor of the
noise-inclusive joint correlation matrix maps an iid standard-normal vector
onto the stacked sample, so texture and noise are generated in a single
pass.  Draws are deterministic functions of (parameters, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import UnknownTestPoint
from .model import CorrelationEngine, _theta_of
from .params import Fragment, FullParams, RstParams, TextureParams


def simulate_pair(params, n_ri, n_ti, noise_std_ri, noise_std_ti, seed,
                  mean_ri: float = 0.0, mean_ti: float = 0.0):
    """Draw one (reference, template) fragment pair.

    seed feeds ``numpy.random.default_rng``; pass a sequence such as
    (seed_base, trial) for independent streams.  The optional mean offsets
    stand for the unknown true central intensities (zero by default; the
    likelihood eliminates them either way, but baselines that are not
    mean-invariant can be stress-tested with them).
    """
    theta = _theta_of(params)
    engine = CorrelationEngine(n_ri, n_ti, noise_std_ri ** 2, noise_std_ti ** 2)
    lower = engine.cholesky_lower(theta)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(engine.m)
    y = lower @ z
    y[:engine.m_ri] += mean_ri
    y[engine.m_ri:] += mean_ti
    ref = Fragment(pixels=y[:engine.m_ri].reshape(n_ri, n_ri, order="F"),
                   noise_var=noise_std_ri ** 2)
    tpl = Fragment(pixels=y[engine.m_ri:].reshape(n_ti, n_ti, order="F"),
                   noise_var=noise_std_ti ** 2)
    return ref, tpl


@dataclass(frozen=True)
class TestPoint:
    """One named benchmark configuration."""

    id: int
    description: str
    params: FullParams
    n_ri: int
    n_ti: int
    noise_std_ri: float
    noise_std_ti: float

    def simulate(self, seed, mean_ri: float = 0.0, mean_ti: float = 0.0):
        return simulate_pair(self.params, self.n_ri, self.n_ti,
                             self.noise_std_ri, self.noise_std_ti, seed,
                             mean_ri=mean_ri, mean_ti=mean_ti)


def _deg(angle_deg: float) -> float:
    return angle_deg * math.pi / 180.0


def _tp(tp_id, description, sigma_x_ti, hurst, k_rt, n_ti, dt, ds,
        alpha_deg, dr):
    # catalogue convention: sigma_n = 1 on both sides, sigma_x_ri = 5,
    # n_ri = n_ti + 8
    return TestPoint(
        id=tp_id,
        description=description,
        params=FullParams(
            TextureParams(sigma_x_ri=5.0, sigma_x_ti=sigma_x_ti,
                          hurst=hurst, k_rt=k_rt),
            RstParams(dt=dt, ds=ds, alpha=_deg(alpha_deg), dr=dr)),
        n_ri=n_ti + 8,
        n_ti=n_ti,
        noise_std_ri=1.0,
        noise_std_ti=1.0,
    )


TEST_POINTS = {
    1: _tp(1, "Basic", 5.0, 0.65, 0.95, 15, 0.25, 0.25, 17.0, 1.025),
    2: _tp(2, "Weak correlation", 5.0, 0.65, 0.50, 15, 0.25, 0.25, 17.0, 1.025),
    3: _tp(3, "Small template CF size", 5.0, 0.65, 0.95, 9, 0.25, 0.25, 17.0, 1.025),
    4: _tp(4, "High noise level", 1.0, 0.65, 0.95, 15, 0.25, 0.25, 17.0, 1.025),
    5: _tp(5, "Rough texture", 5.0, 0.35, 0.95, 15, 0.25, 0.25, 17.0, 1.025),
    6: _tp(6, "Pure translation", 5.0, 0.65, 0.95, 15, 0.5, 0.5, 0.0, 1.0),
    7: _tp(7, "Pure translation", 5.0, 0.65, 0.95, 15, 0.5, 0.0, 0.0, 1.0),
    8: _tp(8, "Pure rotation", 5.0, 0.65, 0.95, 15, 0.0, 0.0, 5.0, 1.0),
    9: _tp(9, "Pure scaling", 5.0, 0.65, 0.95, 15, 0.0, 0.0, 0.0, 0.8),
    10: _tp(10, "Zero geometrical transformation", 5.0, 0.65, 0.95, 15,
            0.0, 0.0, 0.0, 1.0),
}


def test_point(tp_id: int) -> TestPoint:
    """Look up a catalogue test point by id (1..10)."""
    try:
        return TEST_POINTS[int(tp_id)]
    except (KeyError, ValueError, TypeError):
        raise UnknownTestPoint(
            f"test point id must be in 1..{len(TEST_POINTS)}, got {tp_id!r}"
        ) from None


@dataclass(frozen=True)
class NoiseModel:
    """Signal-dependent noise: variance sigma_si^2 + I * sigma_sd^2."""

    sigma_si: float
    sigma_sd: float

    def __post_init__(self):
        if self.sigma_si < 0 or self.sigma_sd < 0:
            raise ValueError("noise model coefficients must be >= 0")


def noise_variance_for_fragment(model: NoiseModel, mean_intensity: float) -> float:
    """Noise variance of a fragment with the given mean intensity."""
    if mean_intensity < 0:
        raise ValueError(f"mean intensity must be >= 0, got {mean_intensity}")
    return model.sigma_si ** 2 + mean_intensity * model.sigma_sd ** 2


# Published sensor calibrations used in the registration experiments.
HYPERION_BAND25_NOISE = NoiseModel(sigma_si=8.3448, sigma_sd=0.2672)
LANDSAT8_B1_NOISE = NoiseModel(sigma_si=0.0, sigma_sd=0.1175)
