"""Parameter containers and fragment geometry.

Conventions used throughout the package:

* fragments are square with odd side N; pixel coordinates are centered,
  t, s in {-(N-1)/2, ..., (N-1)/2}, t vertical (row), s horizontal (column);
* grids are vectorized in column-major order (t varies fastest), which fixes
  the row/column layout of every correlation matrix;
* angles are radians everywhere inside the library; degrees appear only at
  CLI/file boundaries;
* the full parameter vector is ordered
  (sigma_x_ri, sigma_x_ti, hurst, k_rt, dt, ds, alpha, dr).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import check_fragment_pixels, check_finite_scalar

N_PARAMS = 8
PARAM_NAMES = ("sigma_x_ri", "sigma_x_ti", "hurst", "k_rt",
               "dt", "ds", "alpha", "dr")
RST_SLICE = slice(4, 8)


@dataclass(frozen=True)
class RstParams:
    """Rotation-scaling-translation parameters.

    dt, ds : vertical/horizontal translation in pixels
    alpha  : rotation angle in radians
    dr     : isometric scaling factor, > 0
    """

    dt: float
    ds: float
    alpha: float
    dr: float

    def __post_init__(self):
        for name in ("dt", "ds", "alpha", "dr"):
            check_finite_scalar(getattr(self, name), name)
        if self.dr <= 0:
            raise ValueError(f"dr must be > 0, got {self.dr}")

    def to_array(self) -> np.ndarray:
        return np.array([self.dt, self.ds, self.alpha, self.dr])

    @classmethod
    def from_array(cls, x) -> "RstParams":
        dt, ds, alpha, dr = (float(v) for v in x)
        return cls(dt, ds, alpha, dr)

    @classmethod
    def identity(cls) -> "RstParams":
        return cls(0.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class TextureParams:
    """Texture parameters of the correlated-fragment model.

    sigma_x_ri, sigma_x_ti : increment STD at unit distance, >= 0
    hurst                  : roughness exponent in [0, 1]
    k_rt                   : inter-fragment correlation, |k_rt| <= 1
    """

    sigma_x_ri: float
    sigma_x_ti: float
    hurst: float
    k_rt: float

    def __post_init__(self):
        for name in ("sigma_x_ri", "sigma_x_ti", "hurst", "k_rt"):
            check_finite_scalar(getattr(self, name), name)
        if self.sigma_x_ri < 0 or self.sigma_x_ti < 0:
            raise ValueError("sigma_x values must be >= 0")
        if not 0.0 <= self.hurst <= 1.0:
            raise ValueError(f"hurst must lie in [0, 1], got {self.hurst}")
        if abs(self.k_rt) > 1.0:
            raise ValueError(f"|k_rt| must be <= 1, got {self.k_rt}")

    def to_array(self) -> np.ndarray:
        return np.array([self.sigma_x_ri, self.sigma_x_ti, self.hurst, self.k_rt])

    @classmethod
    def from_array(cls, x) -> "TextureParams":
        a, b, h, k = (float(v) for v in x)
        return cls(a, b, h, k)


@dataclass(frozen=True)
class FullParams:
    """Texture and RST parameters together (the 8-vector)."""

    texture: TextureParams
    rst: RstParams

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.texture.to_array(), self.rst.to_array()])

    @classmethod
    def from_array(cls, x) -> "FullParams":
        x = np.asarray(x, dtype=float)
        if x.shape != (N_PARAMS,):
            raise ValueError(f"expected {N_PARAMS} parameters, got shape {x.shape}")
        return cls(TextureParams.from_array(x[:4]), RstParams.from_array(x[4:]))


@dataclass(frozen=True)
class Fragment:
    """A square odd-sized pixel grid with its noise variance.

    pixels[i, j] is the intensity at (t, s) = (i - h, j - h) with
    h = (N - 1) / 2.
    """

    pixels: np.ndarray
    noise_var: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "pixels", check_fragment_pixels(self.pixels))
        if not np.isfinite(self.noise_var) or self.noise_var < 0:
            raise ValueError(f"noise_var must be finite and >= 0, got {self.noise_var}")

    @property
    def size(self) -> int:
        return self.pixels.shape[0]

    @property
    def half(self) -> int:
        return (self.pixels.shape[0] - 1) // 2

    def to_vector(self) -> np.ndarray:
        """Column-major vectorization (t varies fastest)."""
        return self.pixels.flatten(order="F")


def fragment_coords(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Centered (t, s) coordinates of an n-by-n grid in column-major order.

    Element k of the returned vectors is the coordinate pair of the k-th
    entry of ``Fragment.to_vector``; the mapping is a bijection with the
    grid (k = i + n*j).
    """
    if n < 1 or n % 2 == 0:
        raise ValueError(f"fragment size must be odd and positive, got {n}")
    idx = (np.arange(n) - (n - 1) // 2).astype(float)
    return np.tile(idx, n), np.repeat(idx, n)
