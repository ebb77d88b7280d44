"""Command-line interface.

Subcommands: simulate, estimate, crlb, screen, bench.  Angles are degrees
at every flag and file boundary.  Exit codes: 0 success, 2 usage errors,
3 model/numeric failures.  Randomized commands require an explicit seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .bench import CampaignConfig, run_campaign, write_report
from .crlb import RAD_TO_DEG, crlb, outlier_test
from .estimators import MlFbmEstimator, NccEstimator, SsdEstimator
from .exceptions import FbmregError, UnknownTestPoint
from .fragio import (params_manifest, read_fragment, write_fragment,
                     write_json)
from .params import FullParams, RstParams, TextureParams
from .simulate import simulate_pair, test_point

USAGE_EXIT = 2
MODEL_EXIT = 3


def _rst_from_flag(text: str) -> RstParams:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            "expected dt,ds,alpha_deg,dr (four comma-separated numbers)")
    try:
        dt, ds, alpha_deg, dr = (float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return RstParams(dt=dt, ds=ds, alpha=alpha_deg * math.pi / 180.0, dr=dr)


def _add_model_flags(parser):
    group = parser.add_argument_group(
        "explicit model parameters (alternative to --test-point)")
    group.add_argument("--sigma-x-ri", type=float)
    group.add_argument("--sigma-x-ti", type=float)
    group.add_argument("--hurst", type=float)
    group.add_argument("--k-rt", type=float)
    group.add_argument("--dt", type=float)
    group.add_argument("--ds", type=float)
    group.add_argument("--alpha", type=float, help="rotation angle, degrees")
    group.add_argument("--dr", type=float)
    group.add_argument("--n-ri", type=int)
    group.add_argument("--n-ti", type=int)
    group.add_argument("--noise-std-ri", type=float, default=1.0)
    group.add_argument("--noise-std-ti", type=float, default=1.0)


def _resolve_model(args, parser):
    """(params, n_ri, n_ti, noise_std_ri, noise_std_ti, tp_id) from flags."""
    explicit = [args.sigma_x_ri, args.sigma_x_ti, args.hurst, args.k_rt,
                args.dt, args.ds, args.alpha, args.dr, args.n_ri, args.n_ti]
    if args.test_point is not None:
        if any(v is not None for v in explicit):
            parser.error("--test-point conflicts with explicit parameter flags")
        try:
            tp = test_point(args.test_point)
        except UnknownTestPoint as exc:
            parser.error(str(exc))
        return (tp.params, tp.n_ri, tp.n_ti, tp.noise_std_ri,
                tp.noise_std_ti, tp.id)
    if any(v is None for v in explicit):
        parser.error("give --test-point or the full set of explicit "
                     "parameter flags")
    params = FullParams(
        TextureParams(sigma_x_ri=args.sigma_x_ri, sigma_x_ti=args.sigma_x_ti,
                      hurst=args.hurst, k_rt=args.k_rt),
        RstParams(dt=args.dt, ds=args.ds,
                  alpha=args.alpha * math.pi / 180.0, dr=args.dr))
    return (params, args.n_ri, args.n_ti, args.noise_std_ri,
            args.noise_std_ti, None)


def cmd_simulate(args, parser):
    params, n_ri, n_ti, std_ri, std_ti, tp_id = _resolve_model(args, parser)
    ref, tpl = simulate_pair(params, n_ri, n_ti, std_ri, std_ti,
                             seed=args.seed, mean_ri=args.offset_ri,
                             mean_ti=args.offset_ti)
    os.makedirs(args.out_dir, exist_ok=True)
    write_fragment(ref, os.path.join(args.out_dir, "ref.csv"))
    write_fragment(tpl, os.path.join(args.out_dir, "tpl.csv"))
    manifest = params_manifest(params, n_ri, n_ti, std_ri, std_ti,
                               seed=args.seed, test_point_id=tp_id)
    write_json(manifest, os.path.join(args.out_dir, "params.json"))
    print(f"wrote ref.csv, tpl.csv, params.json to {args.out_dir}")
    return 0


def _rst_report(rst: RstParams) -> dict:
    return {"dt": rst.dt, "ds": rst.ds,
            "alpha_deg": rst.alpha * RAD_TO_DEG, "dr": rst.dr}


def cmd_estimate(args, parser):
    reference = read_fragment(args.ref)
    template = read_fragment(args.tpl)
    method = args.method
    result = {"method": method, "init": _rst_report(args.init)}
    if method == "ml":
        est = MlFbmEstimator().fit(reference, template, rst_init=args.init)
        texture = est.texture_
        result.update({
            "rst": _rst_report(est.rst_),
            "texture": {"sigma_x_ri": texture.sigma_x_ri,
                        "sigma_x_ti": texture.sigma_x_ti,
                        "hurst": texture.hurst, "k_rt": texture.k_rt},
            "log_lf": est.log_lf_,
            "central": {"x_ri0": est.central_.x_ri0,
                        "x_ti0": est.central_.x_ti0},
        })
        try:
            bound = crlb(est.params_, reference.size, template.size,
                         reference.noise_var, template.noise_var)
            result["sigma_rst"] = {
                "dt": bound.sigma_rst[0], "ds": bound.sigma_rst[1],
                "alpha_deg": bound.sigma_rst[2], "dr": bound.sigma_rst[3]}
            rst_cov = bound.rst_cov
        except FbmregError as exc:
            # plug-in bound can be singular at boundary optima (k_rt -> 1)
            result["sigma_rst"] = None
            result["sigma_rst_error"] = f"{type(exc).__name__}: {exc}"
            rst_cov = None
    else:
        cls = NccEstimator if method == "ncc" else SsdEstimator
        est = cls().fit(reference, template, rst_init=args.init)
        result.update({
            "rst": _rst_report(est.rst_),
            "score_at_opt": est.score_,
        })
        rst_cov = None
    result["convergence"] = {"converged": est.converged_,
                             "start_index": est.start_index_,
                             "iterations": est.n_iter_}
    if args.truth is not None and rst_cov is not None:
        verdict = outlier_test(est.rst_, args.truth, rst_cov)
        result["outlier"] = {"q": verdict.q, "threshold": verdict.threshold,
                             "is_outlier": verdict.is_outlier}
    elif args.truth is not None:
        err = est.rst_.to_array() - args.truth.to_array()
        result["truth_error"] = {"dt": err[0], "ds": err[1],
                                 "alpha_deg": err[2] * RAD_TO_DEG,
                                 "dr": err[3]}
    text = json.dumps(result, indent=2, sort_keys=True)
    if args.out:
        write_json(result, args.out)
    print(text)
    return 0


def cmd_crlb(args, parser):
    params, n_ri, n_ti, std_ri, std_ti, _ = _resolve_model(args, parser)
    bound = crlb(params, n_ri, n_ti, std_ri ** 2, std_ti ** 2)
    sig = bound.sigma_rst
    print(f"sigma_dt    = {sig[0]:.6g} px")
    print(f"sigma_ds    = {sig[1]:.6g} px")
    print(f"sigma_alpha = {sig[2]:.6g} deg")
    print(f"sigma_dr    = {sig[3]:.6g}")
    if args.full:
        print(json.dumps({"cov_full_rad": bound.cov.tolist(),
                          "sigma_theta_rad": bound.sigma_theta.tolist()},
                         indent=2))
    return 0


def cmd_screen(args, parser):
    from .screening import classify

    reference = read_fragment(args.ref)
    template = read_fragment(args.tpl)
    report = classify(reference, template)
    out = {
        "group": report.group,
        "isotropic": report.isotropic,
        "eigen_ratio": report.eigen_ratio,
        "normal": report.normal,
        "lilliefors": {
            "vertical": {"statistic": report.lilliefors.vertical.statistic,
                         "critical": report.lilliefors.vertical.critical,
                         "rejected": report.lilliefors.vertical.rejected},
            "horizontal": {"statistic": report.lilliefors.horizontal.statistic,
                           "critical": report.lilliefors.horizontal.critical,
                           "rejected": report.lilliefors.horizontal.rejected},
        },
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def cmd_bench(args, parser):
    with open(args.config, "r", encoding="utf-8") as fh:
        spec = json.load(fh)
    if args.seed is not None:
        spec["seed_base"] = args.seed
    if args.out is not None:
        spec["output"] = args.out
    if "seed_base" not in spec:
        parser.error("campaign config has no seed_base and no --seed given")
    try:
        config = CampaignConfig.from_dict(spec)
    except ValueError as exc:
        parser.error(str(exc))
    result = run_campaign(config, n_jobs=args.jobs)
    base = config.output or "campaign_report"
    out_dir = os.path.dirname(base)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    write_report(result, base)
    print(f"wrote {base}.json and {base}.csv "
          f"({len(result.records)} trial records)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fbmreg",
        description="Subpixel fragment registration under an fBm texture "
                    "model: simulator, ML and similarity estimators, CRLB, "
                    "screening and benchmark campaigns.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate",
                           help="draw a correlated fragment pair")
    p_sim.add_argument("--test-point", type=int)
    _add_model_flags(p_sim)
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--out-dir", required=True)
    p_sim.add_argument("--offset-ri", type=float, default=0.0,
                       help="constant intensity offset of the reference")
    p_sim.add_argument("--offset-ti", type=float, default=0.0)
    p_sim.set_defaults(func=cmd_simulate)

    p_est = sub.add_parser("estimate",
                           help="register a template to a reference")
    p_est.add_argument("--ref", required=True)
    p_est.add_argument("--tpl", required=True)
    p_est.add_argument("--init", type=_rst_from_flag,
                       default=RstParams.identity(),
                       help="initial guess dt,ds,alpha_deg,dr (default "
                            "0,0,0,1)")
    p_est.add_argument("--method", choices=("ml", "ncc", "ssd"),
                       default="ml")
    p_est.add_argument("--truth", type=_rst_from_flag,
                       help="true dt,ds,alpha_deg,dr for the outlier test")
    p_est.add_argument("--out", help="also write the result JSON here")
    p_est.set_defaults(func=cmd_estimate)

    p_crlb = sub.add_parser("crlb", help="print the RST error STD bound")
    p_crlb.add_argument("--test-point", type=int)
    _add_model_flags(p_crlb)
    p_crlb.add_argument("--full", action="store_true",
                        help="also print the full 8x8 covariance bound")
    p_crlb.set_defaults(func=cmd_crlb)

    p_screen = sub.add_parser("screen",
                              help="isotropy/normality screening report")
    p_screen.add_argument("--ref", required=True)
    p_screen.add_argument("--tpl", required=True)
    p_screen.set_defaults(func=cmd_screen)

    p_bench = sub.add_parser("bench", help="run a Monte-Carlo campaign")
    p_bench.add_argument("--config", required=True)
    p_bench.add_argument("--seed", type=int,
                         help="override the config's seed_base")
    p_bench.add_argument("--out", help="override the config's output base path")
    p_bench.add_argument("--jobs", type=int,
                         help="worker processes (default: FBMREG_THREADS or "
                              "machine parallelism)")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except FbmregError as exc:
        print(f"fbmreg: {type(exc).__name__}: {exc}", file=sys.stderr)
        return MODEL_EXIT
    except np.linalg.LinAlgError as exc:
        print(f"fbmreg: numeric failure: {exc}", file=sys.stderr)
        return MODEL_EXIT
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"fbmreg: {exc}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
