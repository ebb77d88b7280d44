"""Input validation helpers shared by the estimators and model routines."""

from __future__ import annotations

import numpy as np


def check_finite_scalar(value, name: str) -> float:
    value = float(value)
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    return value


def check_fragment_pixels(pixels) -> np.ndarray:
    """Validate a square odd-sized grid of finite intensities."""
    pixels = np.asarray(pixels, dtype=float)
    if pixels.ndim != 2 or pixels.shape[0] != pixels.shape[1]:
        raise ValueError(f"fragment pixels must be square, got shape {pixels.shape}")
    if pixels.shape[0] % 2 == 0:
        raise ValueError(f"fragment size must be odd, got {pixels.shape[0]}")
    if not np.all(np.isfinite(pixels)):
        raise ValueError("fragment pixels must all be finite")
    return pixels


def as_fragment(obj, noise_var: float = 0.0):
    """Coerce a Fragment or a raw 2-D array into a Fragment."""
    from .params import Fragment

    if isinstance(obj, Fragment):
        return obj
    return Fragment(pixels=np.asarray(obj, dtype=float), noise_var=noise_var)


def as_rst(obj):
    """Coerce an RstParams or a length-4 sequence (dt, ds, alpha, dr)."""
    from .params import RstParams

    if isinstance(obj, RstParams):
        return obj
    return RstParams.from_array(np.asarray(obj, dtype=float))


def check_pair(reference, template):
    """Validate and coerce a (reference, template) fragment pair."""
    ref = as_fragment(reference)
    tpl = as_fragment(template)
    return ref, tpl
