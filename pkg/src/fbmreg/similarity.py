"""Spline resampling of the reference and the NCC / SSD similarity scores.

These back the baseline estimators: they register by interpolating the
reference onto the transformed template lattice and comparing intensities,
which is exactly the data transformation the likelihood route avoids.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .exceptions import DegenerateScore, InsufficientOverlap
from .params import fragment_coords
from .transform import rst_inverse
from .validation import as_fragment, as_rst

MIN_OVERLAP = 0.5


class ReferenceInterpolator:
    """Cubic-spline interpolant of one reference fragment.

    Build once per fragment, evaluate at arbitrary subpixel (t, s) points;
    points outside the fragment support are flagged invalid.
    """

    def __init__(self, reference):
        reference = as_fragment(reference)
        if reference.size < 4:
            raise ValueError("cubic resampling needs a reference of size >= 4")
        self.half = reference.half
        grid = np.arange(reference.size, dtype=float) - self.half
        self._spline = RectBivariateSpline(grid, grid, reference.pixels,
                                           kx=3, ky=3, s=0)

    def sample(self, t, s):
        """Values and validity mask at reference coordinates (t, s)."""
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        mask = (np.abs(t) <= self.half) & (np.abs(s) <= self.half)
        return self._spline.ev(t, s), mask


def resample_reference(reference, rst, grid_size: int,
                       min_overlap: float = MIN_OVERLAP):
    """Interpolate the reference at the inverse-mapped template lattice.

    Returns (values, mask) over the grid_size x grid_size template lattice
    in column-major order; mask marks lattice points whose image lies
    inside the reference support.
    """
    interp = ReferenceInterpolator(reference)
    u, v = fragment_coords(grid_size)
    tp, sp = rst_inverse(u, v, as_rst(rst))
    values, mask = interp.sample(tp, sp)
    if mask.mean() < min_overlap:
        raise InsufficientOverlap(
            f"only {mask.mean():.0%} of template points map inside the "
            f"reference (need >= {min_overlap:.0%})")
    return values, mask


def _masked_signals(reference, template, rst, interp=None,
                    min_overlap: float = MIN_OVERLAP):
    template = as_fragment(template)
    if interp is None:
        interp = ReferenceInterpolator(reference)
    u, v = fragment_coords(template.size)
    tp, sp = rst_inverse(u, v, as_rst(rst))
    values, mask = interp.sample(tp, sp)
    if mask.mean() < min_overlap:
        raise InsufficientOverlap(
            f"only {mask.mean():.0%} of template points map inside the "
            f"reference (need >= {min_overlap:.0%})")
    return template.to_vector()[mask], values[mask]


def ncc_score(reference, template, rst, interp=None) -> float:
    """Pearson correlation between the template and the resampled reference.

    Higher is better; invariant under affine intensity changes of either
    signal.
    """
    a, b = _masked_signals(reference, template, rst, interp)
    sa, sb = a.std(), b.std()
    if sa == 0.0 or sb == 0.0:
        raise DegenerateScore("a masked signal is constant; NCC undefined")
    return float(((a - a.mean()) * (b - b.mean())).mean() / (sa * sb))


def ssd_score(reference, template, rst, interp=None) -> float:
    """Mean squared difference between template and resampled reference.

    Lower is better.
    """
    a, b = _masked_signals(reference, template, rst, interp)
    return float(np.mean((a - b) ** 2))
