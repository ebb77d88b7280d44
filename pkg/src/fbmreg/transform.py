"""The rotation-scaling-translation coordinate transform and its inverse.

Forward map (reference -> template coordinates):

    (u, v)' = dr * [[cos a, sin a], [-sin a, cos a]] (t, s)' + (dt, ds)'

The inverse map sends template lattice points back into the reference
frame; the image of the template origin under the inverse map is
``rst_inverse(0, 0, rst)``.
"""

from __future__ import annotations

import numpy as np

from .validation import as_rst


def rst_forward(t, s, rst):
    """Map reference coordinates (t, s) to template coordinates (u, v)."""
    rst = as_rst(rst)
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    ca, sa = np.cos(rst.alpha), np.sin(rst.alpha)
    u = rst.dr * (ca * t + sa * s) + rst.dt
    v = rst.dr * (-sa * t + ca * s) + rst.ds
    return u, v


def rst_inverse(u, v, rst):
    """Map template coordinates (u, v) to reference coordinates (t', s')."""
    rst = as_rst(rst)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    ca, sa = np.cos(rst.alpha), np.sin(rst.alpha)
    tp = (ca * (u - rst.dt) - sa * (v - rst.ds)) / rst.dr
    sp = (sa * (u - rst.dt) + ca * (v - rst.ds)) / rst.dr
    return tp, sp


def inverse_coordinate_partials(u, v, rst, which: str):
    """Partial derivatives of the inverse-mapped coordinates.

    Returns (d tp/d p, d sp/d p) for p = which in {'dt', 'ds', 'alpha', 'dr'},
    evaluated at template points (u, v); arrays broadcast against u, v.
    """
    rst = as_rst(rst)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    ca, sa = np.cos(rst.alpha), np.sin(rst.alpha)
    if which == "dt":
        shape = np.broadcast(u, v).shape
        return np.full(shape, -ca / rst.dr), np.full(shape, -sa / rst.dr)
    if which == "ds":
        shape = np.broadcast(u, v).shape
        return np.full(shape, sa / rst.dr), np.full(shape, -ca / rst.dr)
    tp, sp = rst_inverse(u, v, rst)
    if which == "alpha":
        return -sp, tp
    if which == "dr":
        return -tp / rst.dr, -sp / rst.dr
    raise ValueError(f"unknown parameter {which!r}")
