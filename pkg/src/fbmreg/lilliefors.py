"""Lilliefors normality test (KS distance to a sample-fitted normal).

Critical values come from the Monte-Carlo table in ``_lilliefors_table``
(100k null replications per tabulated sample size); between table sizes
they are interpolated linearly in 1/sqrt(n), the scale on which they decay.
``simulate_critical_values`` regenerates the table.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from ._lilliefors_table import ALPHAS, CRITICAL, SIZES


def lilliefors_statistic(x) -> float:
    """Two-sided KS distance between x and N(mean(x), var(x)).

    Standardization uses the ddof=1 sample STD, matching the convention of
    the critical-value table.
    """
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    if n < 4:
        raise ValueError(f"need at least 4 observations, got {n}")
    sd = x.std(ddof=1)
    if sd == 0.0:
        raise ValueError("sample is constant; statistic undefined")
    z = np.sort((x - x.mean()) / sd)
    cdf = ndtr(z)
    i = np.arange(1, n + 1)
    d_plus = (i / n - cdf).max()
    d_minus = (cdf - (i - 1) / n).max()
    return float(max(d_plus, d_minus))


def critical_value(n: int, alpha: float) -> float:
    """Critical statistic value at sample size n and significance alpha."""
    if n < int(SIZES[0]):
        raise ValueError(f"no critical values below n = {SIZES[0]}")
    matches = np.nonzero(np.isclose(ALPHAS, alpha))[0]
    if matches.size == 0:
        raise ValueError(f"alpha must be one of {list(ALPHAS)}, got {alpha}")
    column = CRITICAL[:, matches[0]]
    if n >= SIZES[-1]:
        # 1/sqrt(n) tail scaling from the largest tabulated size
        return float(column[-1] * np.sqrt(SIZES[-1] / n))
    inv_sqrt = 1.0 / np.sqrt(SIZES.astype(float))
    # np.interp needs ascending x; 1/sqrt(n) descends with n
    return float(np.interp(1.0 / np.sqrt(n), inv_sqrt[::-1], column[::-1]))


@dataclass(frozen=True)
class LillieforsResult:
    statistic: float
    critical: float
    rejected: bool


def lilliefors_test(x, alpha: float = 0.05) -> LillieforsResult:
    """Test the normal-family null at significance alpha."""
    x = np.asarray(x, dtype=float).ravel()
    stat = lilliefors_statistic(x)
    crit = critical_value(x.size, alpha)
    return LillieforsResult(statistic=stat, critical=crit,
                            rejected=stat > crit)


def simulate_critical_values(sizes, alphas, replications: int = 100_000,
                             seed: int = 20250809) -> np.ndarray:
    """Monte-Carlo critical values: P(D > c) = alpha under the null.

    Returns an array of shape (len(sizes), len(alphas)).  This is the
    generator of the shipped table; each sample size gets its own
    deterministic stream.
    """
    alphas = np.asarray(alphas, dtype=float)
    crit = np.zeros((len(sizes), alphas.size))
    for si, n in enumerate(sizes):
        rng = np.random.default_rng([seed, int(n)])
        chunk = max(1, int(2e7 / n))
        stats = []
        done = 0
        while done < replications:
            m = min(chunk, replications - done)
            stats.append(_ks_normal_batch(rng.standard_normal((m, n))))
            done += m
        crit[si] = np.quantile(np.concatenate(stats), 1.0 - alphas)
    return crit


def _ks_normal_batch(x) -> np.ndarray:
    """Row-wise Lilliefors statistics of an (m, n) sample block."""
    m, n = x.shape
    mu = x.mean(axis=1, keepdims=True)
    sd = x.std(axis=1, ddof=1, keepdims=True)
    z = np.sort((x - mu) / sd, axis=1)
    cdf = ndtr(z)
    i = np.arange(1, n + 1)
    d_plus = (i / n - cdf).max(axis=1)
    d_minus = (cdf - (i - 1) / n).max(axis=1)
    return np.maximum(d_plus, d_minus)
