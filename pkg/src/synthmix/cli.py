"""Command-line interface: simulation, bound evaluation, ratio planning,
spectral estimation, and contour sweeps.

Exit codes: 0 on success, 2 for usage errors (bad flags, values failing
an operation's preconditions), 1 for runtime failures.  The CLI only
routes and prints; every computation is a library call, so results
match direct library use exactly.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import harness, spectral
from .bounds import (
    BoundaryMinimum,
    BoundParams,
    KernelBoundInputs,
    RatioPlan,
    UnboundedRegularization,
    domain_shift_gap_bound,
    domain_shift_kernel_bound,
    kernel_bound,
    lambda_star_appendix,
    lambda_star_closed_form,
    lambda_star_numeric,
    mixed_gap_bound,
    stability_constant,
    traditional_plan,
)

__all__ = ["CliConfig", "parse_args", "run", "main"]

KERNEL_THEOREMS = ("2.2", "5.1")
STABILITY_THEOREMS = ("3.1", "5.2")


@dataclass(frozen=True)
class CliConfig:
    """Validated invocation: subcommand, parameters, and output target."""

    subcommand: str
    params: dict
    out: Path | None = None
    format: str = "csv"


def _jobs_default() -> int:
    env = os.environ.get("SYNTHMIX_JOBS")
    if env is None:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synthmix",
        description="Plan and simulate real/synthetic training-data mixes.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sim = sub.add_parser(
        "simulate", help="run a regularization sweep from a config file"
    )
    sim.add_argument("--config", required=True, help="experiment config file")
    sim.add_argument("--seeds", help="comma-separated seed override")
    sim.add_argument("--seed", type=int, help="single-seed override")
    sim.add_argument("--bias-variance", action="store_true",
                     help="compute Monte Carlo bias/variance columns")
    sim.add_argument("--replicates", type=int, default=50,
                     help="noise replicates per lambda (bias-variance mode)")
    sim.add_argument("--jobs", type=int, default=None,
                     help="worker threads (default: SYNTHMIX_JOBS or 1)")
    sim.add_argument("--out", help="output path for machine-readable results")
    sim.add_argument("--format", choices=("csv", "json"), default="csv")

    bound = sub.add_parser("bound", help="evaluate a generalization bound")
    bound.add_argument("--theorem", required=True,
                       choices=KERNEL_THEOREMS + STABILITY_THEOREMS,
                       help="which bound to evaluate")
    bound.add_argument("--lambda", dest="lam", type=float, required=True,
                       help="regularization strength / mixing weight")
    bound.add_argument("--n", type=int, default=15, help="real-sample count")
    bound.add_argument("--r", type=float, default=2.0, help="eigendecay exponent")
    bound.add_argument("--sigma2", type=float, default=0.1, help="noise variance")
    bound.add_argument("--d", type=float, default=1.0,
                       help="generator discrepancy")
    bound.add_argument("--d-shift", type=float, default=0.0,
                       help="domain-shift discrepancy")
    bound.add_argument("--exact-tail-constant", action="store_true",
                       help="include the quadrature tail constant")
    bound.add_argument("--w2", type=float, default=1.0,
                       help="real-vs-synthetic Wasserstein-2 distance")
    bound.add_argument("--w2-target-synth", type=float, default=1.0,
                       help="target-vs-synthetic Wasserstein-2 distance")
    bound.add_argument("--w2-target-source", type=float, default=1.0,
                       help="target-vs-source Wasserstein-2 distance")
    bound.add_argument("--r-star", type=float, default=0.1,
                       help="population risk minimum")
    bound.add_argument("--mixed-risk", type=float, default=None,
                       help="mixed risk; also prints the stability constant")
    bound.add_argument("--m-strong", type=float, default=1.0,
                       help="strong-convexity constant")
    bound.add_argument("--m1", type=float, default=1.0,
                       help="prediction-smoothness constant")
    bound.add_argument("--m2", type=float, default=1.0,
                       help="input-smoothness constant")
    bound.add_argument("--lipschitz", type=float, default=1.0,
                       help="hypothesis Lipschitz constant")
    bound.add_argument("--diam", type=float, default=1.0,
                       help="hypothesis-class diameter")
    bound.add_argument("--d-star", type=float, default=1.0,
                       help="packing dimension of the synthetic measure")
    bound.add_argument("--const", type=float, default=1.0,
                       help="universal constant")
    bound.add_argument("--out", help="output path for a JSON report")
    bound.add_argument("--format", choices=("csv", "json"), default="json")

    plan = sub.add_parser("plan", help="compute the optimal synthetic-to-real ratio")
    plan.add_argument("--n", type=int, required=True, help="real-sample count")
    plan.add_argument("--r", type=float, required=True, help="eigendecay exponent")
    plan.add_argument("--d", type=float, required=True,
                      help="generator discrepancy")
    plan.add_argument("--sigma2", type=float, required=True,
                      help="noise variance")
    plan.add_argument("--compare-traditional", action="store_true",
                      help="also print the classical mixing plan")
    plan.add_argument("--c", type=float, default=1.0,
                      help="classical-bound constant (with --compare-traditional)")
    plan.add_argument("--m", type=int, default=None,
                      help="synthetic-sample budget (with --compare-traditional)")
    plan.add_argument("--ipm", type=float, default=None,
                      help="distribution mismatch (with --compare-traditional)")
    plan.add_argument("--out", help="output path for a JSON report")
    plan.add_argument("--format", choices=("csv", "json"), default="json")

    est = sub.add_parser("estimate",
                         help="plan the ratio from two image directories")
    est.add_argument("--real-dir", required=True, help="directory of real images")
    est.add_argument("--synth-dir", required=True,
                     help="directory of synthetic images")
    est.add_argument("--sigma2", type=float, default=None, help="noise variance")
    est.add_argument("--sigma2-from-pixels", action="store_true",
                     help="use the pooled pixel variance of the real set")
    est.add_argument("--n", type=int, default=15, help="real-sample count")
    est.add_argument("--fit-lo", type=int, default=None,
                     help="lowest radial bin of the decay fit")
    est.add_argument("--fit-hi", type=int, default=None,
                     help="highest radial bin of the decay fit")
    est.add_argument("--out", help="output path for a JSON report")
    est.add_argument("--format", choices=("csv", "json"), default="json")

    sweep = sub.add_parser("sweep", help="evaluate a bound over a contour grid")
    sweep.add_argument("--kind", required=True,
                       choices=("in_domain", "out_domain"))
    sweep.add_argument("--ratio-lo", type=float, default=1e-2,
                       help="smallest ratio (log-spaced axis)")
    sweep.add_argument("--ratio-hi", type=float, default=1e2,
                       help="largest ratio")
    sweep.add_argument("--ratio-count", type=int, default=25)
    sweep.add_argument("--disc-lo", type=float, default=0.0,
                       help="smallest discrepancy (linear axis)")
    sweep.add_argument("--disc-hi", type=float, default=8.0,
                       help="largest discrepancy")
    sweep.add_argument("--disc-count", type=int, default=9)
    sweep.add_argument("--n", type=int, default=15)
    sweep.add_argument("--sigma2", type=float, default=0.1)
    sweep.add_argument("--r", type=float, default=1.0)
    sweep.add_argument("--d-gen", type=float, default=1.0,
                       help="fixed generator discrepancy (out_domain)")
    sweep.add_argument("--d-shift", type=float, default=1.0,
                       help="fixed shift discrepancy (out_domain)")
    sweep.add_argument("--vary", choices=("d_gen", "d_shift"), default="d_gen",
                       help="which discrepancy the y axis sweeps (out_domain)")
    sweep.add_argument("--out", required=True, help="output path")
    sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def parse_args(argv) -> CliConfig:
    """Parse and validate; exits with code 2 on any usage error."""
    parser = _build_parser()
    ns = parser.parse_args(argv)
    params = vars(ns)
    sub = params.pop("subcommand")
    out = params.pop("out", None)
    fmt = params.pop("format", "csv")

    if sub == "bound":
        if ns.theorem in KERNEL_THEOREMS and ns.lam <= 0:
            parser.error(f"lambda must be > 0 for the kernel bounds, got {ns.lam}")
        if ns.theorem in STABILITY_THEOREMS and not 0 < ns.lam < 1:
            parser.error(
                f"lambda must be in (0, 1) for the mixed-loss bounds, got {ns.lam}"
            )
        for key in ("n",):
            if params[key] < 1:
                parser.error(f"n must be >= 1, got {params[key]}")
        if params["sigma2"] < 0:
            parser.error(f"sigma2 must be >= 0, got {params['sigma2']}")
        if params["d"] < 0 or params["d_shift"] < 0:
            parser.error("d and d-shift must be >= 0")
    elif sub == "plan":
        if params["n"] < 1:
            parser.error(f"n must be >= 1, got {params['n']}")
        if params["r"] < 0.5:
            parser.error(f"r must be >= 0.5, got {params['r']}")
        if params["sigma2"] < 0:
            parser.error(f"sigma2 must be >= 0, got {params['sigma2']}")
        if params["d"] < 0:
            parser.error(f"d must be >= 0, got {params['d']}")
        if params["compare_traditional"]:
            if params["m"] is None or params["ipm"] is None:
                parser.error("--compare-traditional needs --m and --ipm")
    elif sub == "estimate":
        if params["sigma2"] is not None and params["sigma2_from_pixels"]:
            parser.error("pass either --sigma2 or --sigma2-from-pixels, not both")
        if params["sigma2"] is None and not params["sigma2_from_pixels"]:
            parser.error("sigma2 is required (or use --sigma2-from-pixels)")
    elif sub == "simulate":
        if params.get("seeds") is not None and params.get("seed") is not None:
            parser.error("pass either --seed or --seeds, not both")
        if params["replicates"] < 10 and params["bias_variance"]:
            parser.error(f"replicates must be >= 10, got {params['replicates']}")
        try:
            if params.get("seeds") is not None:
                params["seeds"] = tuple(
                    int(s) for s in params["seeds"].split(",") if s.strip()
                )
        except ValueError:
            parser.error(f"malformed seed list: {ns.seeds!r}")
    return CliConfig(subcommand=sub, params=params, out=Path(out) if out else None,
                     format=fmt)


def _fmt(x: float) -> str:
    return format(x, ".6g")


def _print_plan(label: str, plan: RatioPlan) -> None:
    print(
        f"{label:<28s} lambda* = {_fmt(plan.lambda_star)}   "
        f"lambda~ = {_fmt(plan.lambda_tilde)}   "
        f"M* = {math.ceil(plan.m_star)} (raw {_fmt(plan.m_star)})"
    )


def _write_report(cfg: CliConfig, record: dict) -> None:
    if cfg.out is None:
        return
    cfg.out.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    print(f"wrote {cfg.out}")


def _run_plan(cfg: CliConfig) -> int:
    p = cfg.params
    inputs = KernelBoundInputs(
        n=p["n"], r=p["r"], sigma2=p["sigma2"], d_gen=p["d"]
    )
    record: dict = {"inputs": {"n": p["n"], "r": p["r"], "sigma2": p["sigma2"],
                               "d": p["d"]}}
    if p["d"] == 0:
        print(
            "unbounded regularization: the generator matches the target "
            "exactly, so synthetic data helps without limit"
        )
        record["plan"] = "unbounded"
        _write_report(cfg, record)
        return 0

    closed = lambda_star_closed_form(inputs)
    _print_plan("ratio plan (closed form):", closed)
    record["closed_form"] = vars(closed)
    if p["sigma2"] > 0:
        plug_in = lambda_star_appendix(inputs)
        _print_plan("ratio plan (noise-balanced):", plug_in)
        record["noise_balanced"] = vars(plug_in)
    try:
        numeric = lambda_star_numeric(inputs)
        _print_plan("ratio plan (numeric):", numeric)
        record["numeric"] = vars(numeric)
    except BoundaryMinimum as exc:
        print(f"numeric plan: minimum at search boundary lambda = {_fmt(exc.x)}")
        record["numeric"] = {"boundary_lambda": exc.x, "value": exc.value}

    if p["compare_traditional"]:
        trad = traditional_plan(p["c"], p["n"], p["m"], p["ipm"])
        print(
            f"{'traditional plan:':<28s} alpha* = {_fmt(trad.alpha_star)}   "
            f"n* = {_fmt(trad.n_star)}   M_bal = {_fmt(trad.m_bal)}   "
            f"decision = {trad.decision}"
        )
        record["traditional"] = vars(trad)
    _write_report(cfg, record)
    return 0


def _run_bound(cfg: CliConfig) -> int:
    p = cfg.params
    theorem = p["theorem"]
    record: dict = {"theorem": theorem, "lambda": p["lam"]}
    if theorem in KERNEL_THEOREMS:
        inputs = KernelBoundInputs(
            n=p["n"], r=p["r"], sigma2=p["sigma2"], d_gen=p["d"],
            d_shift=p["d_shift"],
        )
        if theorem == "2.2":
            value = kernel_bound(inputs, p["lam"],
                                 exact_tail_constant=p["exact_tail_constant"])
        else:
            value = domain_shift_kernel_bound(inputs, p["lam"])
    else:
        params = BoundParams(
            m=p["m_strong"], m1=p["m1"], m2=p["m2"], l=p["lipschitz"],
            d_diam=p["diam"], d_star=p["d_star"], c=p["const"],
        )
        if theorem == "3.1":
            value = mixed_gap_bound(params, p["lam"], p["n"], p["w2"], p["r_star"])
            if p["mixed_risk"] is not None:
                sc = stability_constant(params, p["lam"], p["n"], p["mixed_risk"])
                print(f"stability constant: {_fmt(sc)}")
                record["stability_constant"] = sc
        else:
            value = domain_shift_gap_bound(
                params, p["lam"], p["n"], p["w2_target_synth"],
                p["w2_target_source"], p["r_star"],
            )
    print(f"bound value: {_fmt(value)}")
    record["value"] = value
    _write_report(cfg, record)
    return 0


def _run_estimate(cfg: CliConfig) -> int:
    p = cfg.params
    real = spectral.load_image_dir(p["real_dir"])
    synth = spectral.load_image_dir(p["synth_dir"])
    d = spectral.spectral_distance(real, synth)
    fit = spectral.fit_decay_exponent(
        spectral.mean_rapsd(real), fit_lo=p["fit_lo"], fit_hi=p["fit_hi"]
    )
    if p["sigma2_from_pixels"]:
        sigma2 = float(
            np.var(np.concatenate([img.pixels.ravel() for img in real]))
        )
        sigma2_source = "pixel variance"
    else:
        sigma2 = p["sigma2"]
        sigma2_source = "provided"
    h, w = real[0].shape
    print(f"images: {len(real)} real, {len(synth)} synthetic ({h}x{w})")
    print(f"spectral distance D = {_fmt(d)}")
    print(f"decay exponent r_hat = {_fmt(fit.r_hat)} "
          f"(fit bins {fit.fit_range[0]}..{fit.fit_range[1]})")
    print(f"sigma2 = {_fmt(sigma2)} ({sigma2_source})")
    record = {
        "d": d, "r_hat": fit.r_hat, "sigma2": sigma2, "n": p["n"],
        "fit_range": list(fit.fit_range),
    }
    try:
        plan = spectral.plan_from_images(
            real, synth, n=p["n"], sigma2=sigma2,
            fit_lo=p["fit_lo"], fit_hi=p["fit_hi"],
        )
        _print_plan("ratio plan (numeric):", plan)
        record["plan"] = vars(plan)
    except UnboundedRegularization:
        print(
            "unbounded regularization: identical spectra, synthetic data "
            "helps without limit"
        )
        record["plan"] = "unbounded"
    _write_report(cfg, record)
    return 0


def _run_simulate(cfg: CliConfig) -> int:
    p = cfg.params
    ucfg = harness.load_config(p["config"])
    if p.get("seed") is not None:
        p["seeds"] = (p["seed"],)
    if p.get("seeds"):
        ucfg = dataclasses.replace(ucfg, seeds=tuple(p["seeds"]))
    jobs = p["jobs"] if p["jobs"] is not None else _jobs_default()
    if p["bias_variance"]:
        result = harness.run_bias_variance(ucfg, p["replicates"], jobs=jobs)
    else:
        result = harness.run_ucurve(ucfg, jobs=jobs)
    err = [row.empirical_error for row in result.rows]
    print(f"sweep rows: {len(result.rows)}   seeds: "
          + ",".join(str(s) for s in result.seeds))
    print(f"generator discrepancy D = {_fmt(result.meta['d_gen'])}")
    print(f"empirical optimum lambda = {_fmt(result.lambda_empirical_opt)} "
          f"(mean error {_fmt(min(err))})")
    print(f"theoretical optimum lambda = {_fmt(result.lambda_theory)}")
    if cfg.out is not None:
        harness.emit(result, cfg.out, format=cfg.format)
        print(f"wrote {cfg.out}")
    return 0


def _run_sweep(cfg: CliConfig) -> int:
    p = cfg.params
    ratio_axis = np.logspace(
        math.log10(p["ratio_lo"]), math.log10(p["ratio_hi"]), p["ratio_count"]
    )
    disc_axis = np.linspace(p["disc_lo"], p["disc_hi"], p["disc_count"])
    grid = harness.run_contour(
        p["kind"], ratio_axis, disc_axis,
        n=p["n"], sigma2=p["sigma2"], r=p["r"],
        d_gen=p["d_gen"], d_shift=p["d_shift"], vary=p["vary"],
    )
    harness.emit_contour(grid, cfg.out, format=cfg.format)
    print(f"contour grid {grid.z.shape[0]}x{grid.z.shape[1]} ({p['kind']}); "
          f"wrote {cfg.out}")
    return 0


_HANDLERS = {
    "plan": _run_plan,
    "bound": _run_bound,
    "estimate": _run_estimate,
    "simulate": _run_simulate,
    "sweep": _run_sweep,
}


def run(cfg: CliConfig) -> int:
    """Execute a parsed invocation; returns the process exit status."""
    return _HANDLERS[cfg.subcommand](cfg)


def main(argv=None) -> int:
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return run(cfg)
    except Exception as exc:  # runtime failures map to exit 1
        print(f"synthmix: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
