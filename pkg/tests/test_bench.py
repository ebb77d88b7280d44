import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fbmreg.bench import (CampaignConfig, EstimatorStats, TrialRecord,
                          campaign_init, outlier_rate, robust_stats,
                          run_campaign, stats_to_dict, write_report)
from fbmreg.crlb import chi2_quantile_4df
from fbmreg.params import RstParams
from fbmreg.simulate import test_point as catalogue_point


def test_robust_stats_all_equal_truth():
    estimates = np.tile([0.25, 0.25, 0.3, 1.025], (5, 1))
    bias, spread = robust_stats(estimates, [0.25, 0.25, 0.3, 1.025])
    assert_allclose(bias, 0.0)
    assert_allclose(spread, 0.0)


def test_robust_stats_hand_order_statistics():
    estimates = np.zeros((3, 4))
    estimates[:, 0] = [0.0, 1.0, 2.0]
    bias, spread = robust_stats(estimates, [1.0, 0.0, 0.0, 0.0])
    assert bias[0] == 0.0
    assert_allclose(spread[0], 1.48)


def test_robust_stats_even_length_median():
    estimates = np.zeros((4, 4))
    estimates[:, 1] = [1.0, 2.0, 4.0, 8.0]
    bias, _ = robust_stats(estimates, [0.0, 3.0, 0.0, 0.0])
    assert bias[1] == 0.0  # median of (1,2,4,8) = 3


def test_robust_stats_normal_consistency():
    rng = np.random.default_rng(42)
    estimates = np.zeros((1000, 4))
    estimates[:, 0] = rng.normal(0.25, 0.048, 1000)
    bias, spread = robust_stats(estimates, [0.25, 0.0, 0.0, 0.0])
    assert abs(bias[0]) <= 0.005
    assert 0.043 <= spread[0] <= 0.053


def test_robust_stats_needs_three():
    with pytest.raises(ValueError):
        robust_stats(np.zeros((2, 4)), np.zeros(4))


def _record(q, failed=False, tp="tp1", est="ml"):
    truth = np.array([0.25, 0.25, 0.3, 1.025])
    return TrialRecord(test_point=tp, estimator=est, trial=0,
                       rst_truth=truth, rst_hat=None if failed else truth,
                       absolute_error=None if failed else np.zeros(4),
                       normalized_error=None if failed else np.zeros(4),
                       q=q, converged=not failed, failed=failed, runtime=0.0)


def test_outlier_rate_zero_when_all_q_zero():
    records = [_record(0.0) for _ in range(10)]
    assert outlier_rate(records) == {("tp1", "ml"): 0.0}


def test_outlier_rate_counts_exceedances_and_failures():
    threshold = chi2_quantile_4df(1e-6)
    records = ([_record(threshold + 1.0) for _ in range(2)]
               + [_record(0.0) for _ in range(7)]
               + [_record(float("inf"), failed=True)])
    assert outlier_rate(records) == {("tp1", "ml"): 0.3}


def test_campaign_init_rounds_translations():
    tp = catalogue_point(1)
    init = campaign_init(tp)
    assert (init.dt, init.ds) == (0.0, 0.0)
    assert init.alpha == tp.params.rst.alpha
    assert init.dr == tp.params.rst.dr


def test_config_validation():
    with pytest.raises(ValueError):
        CampaignConfig.from_dict({"test_points": [1], "estimators": ["mi"],
                                  "trials": 1, "seed_base": 0})
    with pytest.raises(ValueError):
        CampaignConfig.from_dict({"test_points": [1], "estimators": ["ml"],
                                  "trials": 1, "seed_base": 0, "bogus": 1})
    with pytest.raises(ValueError):
        CampaignConfig.from_dict({"estimators": ["ml"], "trials": 1,
                                  "seed_base": 0})


def test_zero_trial_campaign(tmp_path):
    config = {"test_points": [1], "estimators": ["ml"], "trials": 0,
              "seed_base": 5}
    result = run_campaign(config, n_jobs=1)
    assert result.records == []
    assert result.stats == []
    write_report(result, str(tmp_path / "empty"))
    report = json.loads((tmp_path / "empty").with_suffix(".json").read_text())
    assert report["results"] == []
    csv_text = (tmp_path / "empty").with_suffix(".csv").read_text()
    assert len(csv_text.strip().splitlines()) == 1  # header only


def small_campaign_spec(trials=4, estimators=("ncc",)):
    # small inline test point keeps estimator fits fast
    return {
        "test_points": [{
            "params": {"sigma_x_ri": 5.0, "sigma_x_ti": 5.0, "hurst": 0.65,
                       "k_rt": 0.95, "dt": 0.25, "ds": 0.25,
                       "alpha_deg": 17.0, "dr": 1.025},
            "n_ri": 17, "n_ti": 9,
            "noise_std_ri": 1.0, "noise_std_ti": 1.0,
        }],
        "estimators": list(estimators),
        "trials": trials,
        "seed_base": 11,
    }


def test_campaign_records_and_stats():
    result = run_campaign(small_campaign_spec(trials=5), n_jobs=1)
    assert len(result.records) == 5
    assert [r.trial for r in result.records] == list(range(5))
    st = result.stats[0]
    assert isinstance(st, EstimatorStats)
    assert st.n_trials == 5
    assert st.n_failed == 0
    assert np.all(np.isfinite(st.bias))
    assert st.sigma_rst is not None
    d = stats_to_dict(st)
    assert d["estimator"] == "ncc"
    assert set(d["bias"]) == {"dt", "ds", "alpha_deg", "dr"}


def test_campaign_deterministic_across_parallelism(tmp_path):
    spec = small_campaign_spec(trials=4)
    serial = run_campaign(spec, n_jobs=1)
    parallel = run_campaign(spec, n_jobs=2)
    write_report(serial, str(tmp_path / "serial"))
    write_report(parallel, str(tmp_path / "parallel"))
    assert ((tmp_path / "serial.csv").read_bytes()
            == (tmp_path / "parallel.csv").read_bytes())
    assert ((tmp_path / "serial.json").read_bytes()
            == (tmp_path / "parallel.json").read_bytes())


def test_campaign_csv_has_documented_columns(tmp_path):
    from fbmreg.bench import CSV_COLUMNS

    result = run_campaign(small_campaign_spec(trials=3), n_jobs=1)
    write_report(result, str(tmp_path / "out"))
    header = (tmp_path / "out.csv").read_text().splitlines()[0]
    assert header == ",".join(CSV_COLUMNS)


def test_normalized_errors_use_bound_at_truth():
    result = run_campaign(small_campaign_spec(trials=3), n_jobs=1)
    rec = result.records[0]
    st = result.stats[0]
    assert_allclose(rec.normalized_error,
                    rec.absolute_error / st.sigma_rst, rtol=1e-12)
    assert rec.q >= 0.0
