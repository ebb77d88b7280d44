"""Monte-Carlo benchmark campaigns over the test-point catalogue.

A campaign simulates fragment pairs at configured test points, runs each
configured estimator on every pair, and aggregates the robust error
statistics (median bias, 1.48*MAD spread, efficiency against the CRLB) and
outlier rates.  Trials are deterministic functions of (seed_base,
test-point index, trial index), so campaigns are reproducible and safely
parallel; reports are byte-identical across runs (wall-clock timings stay
on the in-memory records only).
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from .crlb import RAD_TO_DEG, chi2_quantile_4df, crlb
from .estimators import MlFbmEstimator, NccEstimator, SsdEstimator
from .exceptions import FbmregError, SingularFim
from .params import FullParams, RstParams, TextureParams
from .simulate import TestPoint, simulate_pair, test_point

ESTIMATORS = {
    "ml": MlFbmEstimator,
    "ncc": NccEstimator,
    "ssd": SsdEstimator,
}

RST_KEYS = ("dt", "ds", "alpha", "dr")

CSV_COLUMNS = (
    "test_point", "estimator", "trial", "failed", "converged",
    "dt_true", "ds_true", "alpha_deg_true", "dr_true",
    "dt_hat", "ds_hat", "alpha_deg_hat", "dr_hat",
    "err_dt", "err_ds", "err_alpha_deg", "err_dr",
    "norm_dt", "norm_ds", "norm_alpha", "norm_dr",
    "q",
)


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one estimator run on one simulated pair.

    Errors are (dt, ds, alpha_rad, dr); normalized errors divide by the CRLB
    STD at the true parameters.  runtime is wall-clock seconds and is not
    persisted (reports must be byte-identical across runs).
    """

    test_point: str
    estimator: str
    trial: int
    rst_truth: np.ndarray
    rst_hat: np.ndarray | None
    absolute_error: np.ndarray | None
    normalized_error: np.ndarray | None
    q: float
    converged: bool
    failed: bool
    runtime: float


@dataclass(frozen=True)
class EstimatorStats:
    """Robust per-parameter statistics of one (test point, estimator) cell.

    Arrays are ordered (dt, ds, alpha_rad, dr).  efficiency is in percent;
    entries exceeding the bound beyond Monte-Carlo noise are listed in
    above_bound (expected exactly at the zero-transform catalogue point,
    where the bound is known to be locally pessimistic).
    """

    test_point: str
    estimator: str
    n_trials: int
    n_failed: int
    bias: np.ndarray
    robust_std: np.ndarray
    mse: np.ndarray
    efficiency: np.ndarray | None
    avg_efficiency: float | None
    p_out: float
    p_out_crude: float
    sigma_rst: np.ndarray | None
    above_bound: tuple = ()


def robust_stats(estimates, truth):
    """Median bias and 1.48*MAD spread, per parameter.

    estimates: (n, 4) array of RST estimates; truth: length-4 truth vector.
    Medians of even-length samples average the two central order statistics
    (numpy convention).
    """
    estimates = np.asarray(estimates, dtype=float)
    if estimates.ndim != 2 or estimates.shape[0] < 3:
        raise ValueError("need at least 3 estimates")
    truth = np.asarray(truth, dtype=float)
    med = np.median(estimates, axis=0)
    bias = truth - med
    mad = np.median(np.abs(estimates - med), axis=0)
    return bias, 1.48 * mad


def outlier_rate(records, threshold: float | None = None):
    """P(Q > threshold) per (test point, estimator); failures count as
    outliers."""
    if threshold is None:
        threshold = chi2_quantile_4df(1e-6)
    cells = {}
    for rec in records:
        key = (rec.test_point, rec.estimator)
        total, out = cells.get(key, (0, 0))
        is_out = rec.failed or (np.isfinite(rec.q) and rec.q > threshold)
        cells[key] = (total + 1, out + int(is_out))
    return {key: out / total for key, (total, out) in cells.items()}


# -- campaign configuration -------------------------------------------------


def _parse_test_point(entry, position: int):
    """A config entry is a catalogue id or an inline specification."""
    if isinstance(entry, (int, np.integer)):
        return f"tp{int(entry)}", test_point(int(entry))
    if isinstance(entry, dict):
        p = entry["params"]
        params = FullParams(
            TextureParams(sigma_x_ri=p["sigma_x_ri"], sigma_x_ti=p["sigma_x_ti"],
                          hurst=p["hurst"], k_rt=p["k_rt"]),
            RstParams(dt=p["dt"], ds=p["ds"],
                      alpha=p["alpha_deg"] * math.pi / 180.0, dr=p["dr"]))
        label = str(entry.get("id", f"custom{position}"))
        return label, TestPoint(
            id=-1, description=label, params=params,
            n_ri=int(entry["n_ri"]), n_ti=int(entry["n_ti"]),
            noise_std_ri=float(entry["noise_std_ri"]),
            noise_std_ti=float(entry["noise_std_ti"]))
    raise ValueError(f"test point entry must be an id or a mapping, got {entry!r}")


@dataclass
class CampaignConfig:
    """Validated campaign specification."""

    test_points: list
    estimators: list
    trials: int
    seed_base: int
    output: str | None = None
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, spec: dict) -> "CampaignConfig":
        unknown = set(spec) - {"test_points", "estimators", "trials",
                               "seed_base", "output"}
        if unknown:
            raise ValueError(f"unknown campaign config keys: {sorted(unknown)}")
        try:
            entries = [_parse_test_point(e, i)
                       for i, e in enumerate(spec["test_points"])]
            estimators = [str(e).lower() for e in spec["estimators"]]
            trials = int(spec["trials"])
            seed_base = int(spec["seed_base"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"invalid campaign config: {exc}") from exc
        for name in estimators:
            if name not in ESTIMATORS:
                raise ValueError(f"unknown estimator {name!r}; "
                                 f"choose from {sorted(ESTIMATORS)}")
        if trials < 0:
            raise ValueError("trials must be >= 0")
        return cls(test_points=entries, estimators=estimators, trials=trials,
                   seed_base=seed_base, output=spec.get("output"), raw=dict(spec))


def campaign_init(tp: TestPoint) -> RstParams:
    """Per-trial initial transform guess: the truth with its translation
    rounded to the nearest integer (the coarse-registration convention)."""
    rst = tp.params.rst
    return RstParams(dt=float(np.rint(rst.dt)), ds=float(np.rint(rst.ds)),
                     alpha=rst.alpha, dr=rst.dr)


def _trial_chunk(payload):
    """Worker: run a contiguous block of trials of one campaign cell."""
    (label, tp, tp_index, estimator_name, trial_lo, trial_hi, seed_base,
     sigma_rst, rst_cov_inv) = payload
    truth = tp.params.rst.to_array()
    rst_init = campaign_init(tp)
    out = []
    with threadpool_limits(limits=1):
        for trial in range(trial_lo, trial_hi):
            ref, tpl = simulate_pair(tp.params, tp.n_ri, tp.n_ti,
                                     tp.noise_std_ri, tp.noise_std_ti,
                                     seed=[seed_base, tp_index, trial])
            start = time.perf_counter()
            try:
                est = ESTIMATORS[estimator_name]()
                est.fit(ref, tpl, rst_init=rst_init)
                rst_hat = est.rst_.to_array()
                converged = bool(est.converged_)
                failed = False
            except FbmregError:
                rst_hat = None
                converged = False
                failed = True
            runtime = time.perf_counter() - start
            if failed:
                out.append(TrialRecord(label, estimator_name, trial, truth,
                                       None, None, None, float("inf"),
                                       False, True, runtime))
                continue
            err = rst_hat - truth
            if sigma_rst is not None:
                norm = err / sigma_rst
                q = float(err @ rst_cov_inv @ err)
            else:
                norm = None
                q = float("nan")
            out.append(TrialRecord(label, estimator_name, trial, truth,
                                   rst_hat, err, norm, q, converged, False,
                                   runtime))
    return out


@dataclass(frozen=True)
class CampaignResult:
    records: list
    stats: list
    config: CampaignConfig


def default_workers() -> int:
    env = os.environ.get("FBMREG_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_campaign(config, n_jobs: int | None = None) -> CampaignResult:
    """Execute a campaign; config is a CampaignConfig or its dict form.

    Deterministic given the config and seed base, independent of n_jobs
    (records are reassembled in (test point, estimator, trial) order).
    """
    if not isinstance(config, CampaignConfig):
        config = CampaignConfig.from_dict(config)
    workers = n_jobs if n_jobs is not None else default_workers()

    # CRLB at the true parameters normalizes every trial of a test point
    bounds = []
    for label, tp in config.test_points:
        try:
            res = crlb(tp.params, tp.n_ri, tp.n_ti,
                       tp.noise_std_ri ** 2, tp.noise_std_ti ** 2)
            bounds.append((res.sigma_theta[4:], np.linalg.inv(res.rst_cov)))
        except SingularFim:
            bounds.append((None, None))

    tasks = []
    chunk = max(1, -(-config.trials // max(1, 4 * workers)))
    for tp_index, (label, tp) in enumerate(config.test_points):
        sigma_rst, cov_inv = bounds[tp_index]
        for estimator_name in config.estimators:
            for lo in range(0, config.trials, chunk):
                hi = min(lo + chunk, config.trials)
                tasks.append((label, tp, tp_index, estimator_name, lo, hi,
                              config.seed_base, sigma_rst, cov_inv))

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_trial_chunk, tasks))
    else:
        chunks = [_trial_chunk(t) for t in tasks]

    records = [rec for chunk_out in chunks for rec in chunk_out]
    order = {(label, est): (i, j)
             for i, (label, _) in enumerate(config.test_points)
             for j, est in enumerate(config.estimators)}
    records.sort(key=lambda r: (*order[(r.test_point, r.estimator)], r.trial))

    stats = []
    for tp_index, (label, tp) in enumerate(config.test_points):
        sigma_rst, _ = bounds[tp_index]
        for estimator_name in config.estimators:
            cell = [r for r in records
                    if r.test_point == label and r.estimator == estimator_name]
            if cell:
                stats.append(_cell_stats(label, estimator_name, cell,
                                         sigma_rst))
    return CampaignResult(records=records, stats=stats, config=config)


def _cell_stats(label, estimator_name, cell, sigma_rst) -> EstimatorStats:
    threshold = chi2_quantile_4df(1e-6)
    ok = [r for r in cell if not r.failed]
    n_failed = len(cell) - len(ok)
    if len(ok) >= 3:
        estimates = np.array([r.rst_hat for r in ok])
        truth = cell[0].rst_truth
        bias, spread = robust_stats(estimates, truth)
        mse = spread ** 2 + bias ** 2
    else:
        bias = spread = mse = np.full(4, np.nan)
    if sigma_rst is not None and np.all(np.isfinite(mse)) and np.all(mse > 0):
        efficiency = 100.0 * sigma_rst ** 2 / mse
        avg_eff = float(efficiency.mean())
        band = 100.0 * (1.0 + 3.0 * math.sqrt(2.0 / max(len(ok), 1)))
        above = tuple(RST_KEYS[i] for i in range(4) if efficiency[i] > band)
    else:
        efficiency = None
        avg_eff = None
        above = ()
    n_out = sum(1 for r in cell
                if r.failed or (np.isfinite(r.q) and r.q > threshold))
    p_out = n_out / len(cell)
    # crude per-component rate: |error| > 4 * robust spread, averaged
    if len(ok) >= 3 and np.all(np.isfinite(spread)) and np.all(spread > 0):
        errors = np.array([r.absolute_error for r in ok])
        p_crude = float((np.abs(errors) > 4.0 * spread).mean())
    else:
        p_crude = float("nan")
    return EstimatorStats(test_point=label, estimator=estimator_name,
                          n_trials=len(cell), n_failed=n_failed, bias=bias,
                          robust_std=spread, mse=mse, efficiency=efficiency,
                          avg_efficiency=avg_eff, p_out=p_out,
                          p_out_crude=p_crude, sigma_rst=sigma_rst,
                          above_bound=above)


# -- report serialization ----------------------------------------------------


def _rst_dict(values, degrees_for_alpha=True):
    if values is None:
        return None
    values = np.asarray(values, dtype=float)
    out = {"dt": values[0], "ds": values[1], "dr": values[3]}
    if degrees_for_alpha:
        out["alpha_deg"] = values[2] * RAD_TO_DEG
    else:
        out["alpha"] = values[2]
    return out


def stats_to_dict(st: EstimatorStats) -> dict:
    eff = None if st.efficiency is None else {
        k: float(v) for k, v in zip(RST_KEYS, st.efficiency)}
    return {
        "test_point": st.test_point,
        "estimator": st.estimator,
        "n_trials": st.n_trials,
        "n_failed": st.n_failed,
        "bias": _rst_dict(st.bias),
        "robust_std": _rst_dict(st.robust_std),
        "efficiency_pct": eff,
        "avg_efficiency_pct": st.avg_efficiency,
        "p_out": st.p_out,
        "p_out_crude": st.p_out_crude,
        "sigma_rst_bound": None if st.sigma_rst is None else _rst_dict(st.sigma_rst),
        "above_bound": list(st.above_bound),
    }


def _atomic_write(path, text):
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_report(result: CampaignResult, base_path: str):
    """Write <base>.json (stats) and <base>.csv (one row per trial)."""
    report = {
        "config": result.config.raw,
        "results": [stats_to_dict(st) for st in result.stats],
    }
    _atomic_write(base_path + ".json",
                  json.dumps(report, indent=2, sort_keys=True) + "\n")

    lines = [",".join(CSV_COLUMNS)]
    for rec in result.records:
        truth = rec.rst_truth
        row = [rec.test_point, rec.estimator, str(rec.trial),
               str(int(rec.failed)), str(int(rec.converged)),
               repr(truth[0]), repr(truth[1]),
               repr(truth[2] * RAD_TO_DEG), repr(truth[3])]
        if rec.failed:
            row += [""] * 12 + ["inf"]
        else:
            hat, err, norm = rec.rst_hat, rec.absolute_error, rec.normalized_error
            row += [repr(hat[0]), repr(hat[1]), repr(hat[2] * RAD_TO_DEG),
                    repr(hat[3]),
                    repr(err[0]), repr(err[1]), repr(err[2] * RAD_TO_DEG),
                    repr(err[3])]
            if norm is None:
                row += [""] * 4 + ["nan"]
            else:
                row += [repr(norm[0]), repr(norm[1]), repr(norm[2]),
                        repr(norm[3]), repr(rec.q)]
        lines.append(",".join(row))
    _atomic_write(base_path + ".csv", "\n".join(lines) + "\n")
