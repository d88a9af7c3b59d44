"""Desk-scale experiment drivers: ratio sweeps, bias-variance sweeps,
bound contour grids, and CSV/JSON emission.

A sweep samples training data per seed, fits the generator-regularized
estimator across a log-spaced ratio grid, and records the empirical L2
test error next to the theoretical bound and the planner's optimum.
Results are plain records that serialize losslessly (17 significant
digits) for external plotting.
"""

from __future__ import annotations

import configparser
import csv
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bounds import (
    BoundaryMinimum,
    KernelBoundInputs,
    domain_shift_kernel_bound,
    kernel_bound,
    lambda_star_appendix,
    lambda_star_numeric,
)
from .discrepancy import discrepancy
from .krr import bias_variance_mc, empirical_l2_error, fit
from .mercer import EigenSpec, make_series, sample_training_set

__all__ = [
    "UcurveConfig",
    "SweepRow",
    "SweepResult",
    "ContourGrid",
    "run_ucurve",
    "run_bias_variance",
    "run_contour",
    "emit",
    "emit_contour",
    "read_sweep_csv",
    "load_config",
]

CSV_COLUMNS = ("lambda", "empirical_error", "bound_value", "bias2", "variance")

DEFAULT_SEEDS = (42, 43, 44)


@dataclass(frozen=True)
class UcurveConfig:
    """Full parameterization of a ratio sweep."""

    r: float
    s: float
    s_prime: float
    t_f: int
    t_g: int
    n: int = 15
    sigma2: float = 0.1
    lambda_lo_exp: float = -10.0
    lambda_hi_exp: float = 10.0
    lambda_count: int = 50
    grid_size: int = 500
    seeds: tuple[int, ...] = DEFAULT_SEEDS

    def __post_init__(self):
        if not self.lambda_lo_exp < self.lambda_hi_exp:
            raise ValueError("lambda grid needs lo_exp < hi_exp")
        if self.lambda_count < 3:
            raise ValueError("lambda grid needs >= 3 points")
        if not self.seeds:
            raise ValueError("seed list is empty")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    def lambdas(self) -> np.ndarray:
        return np.logspace(self.lambda_lo_exp, self.lambda_hi_exp, self.lambda_count)

    def eigen_spec(self) -> EigenSpec:
        return EigenSpec(r=self.r, j_max=max(self.t_f, self.t_g))


@dataclass(frozen=True)
class SweepRow:
    lam: float
    empirical_error: float | None = None
    bound_value: float | None = None
    bias2: float | None = None
    variance: float | None = None


@dataclass(frozen=True)
class SweepResult:
    """Per-lambda sweep records plus the empirical and planned optima."""

    rows: tuple[SweepRow, ...]
    lambda_empirical_opt: float
    lambda_theory: float
    seeds: tuple[int, ...]
    per_seed_errors: np.ndarray | None
    meta: dict

    def lambdas(self) -> np.ndarray:
        return np.array([row.lam for row in self.rows])

    def column(self, name: str) -> np.ndarray:
        return np.array(
            [getattr(row, name) if getattr(row, name) is not None else np.nan
             for row in self.rows]
        )


@dataclass(frozen=True)
class ContourGrid:
    """Bound values over a (discrepancy, ratio) grid."""

    x_axis: np.ndarray  # ratio values
    y_axis: np.ndarray  # discrepancy values
    z: np.ndarray       # z[i, j] = bound at (y_axis[i], x_axis[j])
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.z.shape != (len(self.y_axis), len(self.x_axis)):
            raise ValueError("z shape must match (len(y_axis), len(x_axis))")
        if not np.all(np.isfinite(self.z)):
            raise ValueError("contour grid contains non-finite values")


def _map_ordered(fn, tasks, jobs: int):
    """Apply fn to tasks, preserving order; threads when jobs > 1."""
    if jobs <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def _theory_lambda(inputs: KernelBoundInputs) -> float:
    """Reported theoretical optimum for a sweep.

    The noise-balanced plug-in form (sigma2 / (N d))^(4r / (8r+1))
    tracks the empirical optimum of the estimator; the numeric bound
    minimizer serves as fallback for noiseless runs, and a perfect
    generator has no finite optimum.
    """
    if inputs.d_gen == 0:
        return math.inf
    if inputs.sigma2 > 0:
        return lambda_star_appendix(inputs).lambda_star
    try:
        return lambda_star_numeric(inputs).lambda_star
    except BoundaryMinimum as exc:
        return exc.x


def run_ucurve(cfg: UcurveConfig, jobs: int = 1) -> SweepResult:
    """Sweep the ratio grid, recording mean empirical error per lambda.

    Training data is sampled once per seed; every (seed, lambda) fit is
    an independent task, and aggregation is order-fixed, so results do
    not depend on the worker count.  The reported empirical optimum is
    the smallest lambda attaining the minimal mean error.
    """
    spec = cfg.eigen_spec()
    f_star = make_series(spec, cfg.s, cfg.t_f)
    g = make_series(spec, cfg.s_prime, cfg.t_g)
    lambdas = cfg.lambdas()
    trains = [
        sample_training_set(f_star, cfg.n, cfg.sigma2, seed) for seed in cfg.seeds
    ]

    def one(task):
        i, j = task
        sol = fit(spec, trains[i], g, float(lambdas[j]))
        return empirical_l2_error(sol, f_star, cfg.grid_size)

    tasks = [(i, j) for i in range(len(cfg.seeds)) for j in range(len(lambdas))]
    flat = _map_ordered(one, tasks, jobs)
    errors = np.array(flat).reshape(len(cfg.seeds), len(lambdas))
    mean_err = errors.mean(axis=0)

    d_gen = discrepancy(f_star, g).value
    inputs = KernelBoundInputs(n=cfg.n, r=cfg.r, sigma2=cfg.sigma2, d_gen=d_gen)
    lambda_theory = _theory_lambda(inputs)

    rows = tuple(
        SweepRow(
            lam=float(lam),
            empirical_error=float(err),
            bound_value=kernel_bound(inputs, float(lam)),
        )
        for lam, err in zip(lambdas, mean_err)
    )
    return SweepResult(
        rows=rows,
        lambda_empirical_opt=float(lambdas[int(np.argmin(mean_err))]),
        lambda_theory=float(lambda_theory),
        seeds=cfg.seeds,
        per_seed_errors=errors,
        meta={
            "kind": "ucurve",
            "r": cfg.r,
            "s": cfg.s,
            "s_prime": cfg.s_prime,
            "t_f": cfg.t_f,
            "t_g": cfg.t_g,
            "n": cfg.n,
            "sigma2": cfg.sigma2,
            "grid_size": cfg.grid_size,
            "d_gen": d_gen,
        },
    )


def run_bias_variance(
    cfg: UcurveConfig, replicates: int, jobs: int = 1
) -> SweepResult:
    """Monte Carlo bias-variance columns across the lambda grid.

    Each lambda gets one decomposition per seed (noise redrawn across
    replicates, inputs fixed per seed); columns report seed means.  The
    empirical_error column carries the Monte Carlo risk.
    """
    if replicates < 10:
        raise ValueError(f"need >= 10 replicates, got {replicates}")
    spec = cfg.eigen_spec()
    f_star = make_series(spec, cfg.s, cfg.t_f)
    g = make_series(spec, cfg.s_prime, cfg.t_g)
    lambdas = cfg.lambdas()

    def one(task):
        seed, lam = task
        return bias_variance_mc(
            spec, f_star, g, cfg.n, cfg.sigma2, float(lam), replicates,
            seed, cfg.grid_size,
        )

    tasks = [(seed, lam) for lam in lambdas for seed in cfg.seeds]
    reports = _map_ordered(one, tasks, jobs)
    n_seeds = len(cfg.seeds)

    d_gen = discrepancy(f_star, g).value
    inputs = KernelBoundInputs(n=cfg.n, r=cfg.r, sigma2=cfg.sigma2, d_gen=d_gen)
    rows = []
    for j, lam in enumerate(lambdas):
        batch = reports[j * n_seeds : (j + 1) * n_seeds]
        rows.append(
            SweepRow(
                lam=float(lam),
                empirical_error=float(np.mean([b.risk for b in batch])),
                bound_value=kernel_bound(inputs, float(lam)),
                bias2=float(np.mean([b.bias2 for b in batch])),
                variance=float(np.mean([b.variance for b in batch])),
            )
        )
    risks = np.array([row.empirical_error for row in rows])
    return SweepResult(
        rows=tuple(rows),
        lambda_empirical_opt=float(lambdas[int(np.argmin(risks))]),
        lambda_theory=_theory_lambda(inputs),
        seeds=cfg.seeds,
        per_seed_errors=None,
        meta={
            "kind": "bias_variance",
            "replicates": replicates,
            "mc_std_err": [
                float(np.sqrt(np.mean([b.mc_std_err**2 for b in
                                       reports[j * n_seeds:(j + 1) * n_seeds]])))
                for j in range(len(lambdas))
            ],
            "r": cfg.r,
            "s": cfg.s,
            "s_prime": cfg.s_prime,
            "t_f": cfg.t_f,
            "t_g": cfg.t_g,
            "n": cfg.n,
            "sigma2": cfg.sigma2,
            "d_gen": d_gen,
        },
    )


def run_contour(
    kind: str,
    ratio_axis,
    disc_axis,
    n: int = 15,
    sigma2: float = 0.1,
    r: float = 1.0,
    d_gen: float = 1.0,
    d_shift: float = 1.0,
    vary: str = "d_gen",
) -> ContourGrid:
    """Evaluate a bound over a (discrepancy, ratio) grid.

    kind "in_domain" uses the in-domain kernel bound with the y axis as
    generator discrepancy; "out_domain" uses the domain-shift bound,
    with `vary` choosing whether the y axis sweeps the generator or the
    shift discrepancy (the other stays at its fixed value).
    """
    ratio_axis = np.asarray(ratio_axis, dtype=float)
    disc_axis = np.asarray(disc_axis, dtype=float)
    if ratio_axis.size == 0 or disc_axis.size == 0:
        raise ValueError("axes must be nonempty")
    if np.any(ratio_axis <= 0):
        raise ValueError("ratio axis must be strictly positive")
    if np.any(disc_axis < 0):
        raise ValueError("discrepancy axis must be nonnegative")
    if kind not in ("in_domain", "out_domain"):
        raise ValueError(f"unknown contour kind: {kind!r}")
    if vary not in ("d_gen", "d_shift"):
        raise ValueError(f"unknown vary target: {vary!r}")

    z = np.empty((disc_axis.size, ratio_axis.size))
    for i, d in enumerate(disc_axis):
        if kind == "in_domain":
            inputs = KernelBoundInputs(n=n, r=r, sigma2=sigma2, d_gen=float(d))
            evaluate = kernel_bound
        else:
            gen = float(d) if vary == "d_gen" else d_gen
            shift = float(d) if vary == "d_shift" else d_shift
            inputs = KernelBoundInputs(
                n=n, r=r, sigma2=sigma2, d_gen=gen, d_shift=shift
            )
            evaluate = domain_shift_kernel_bound
        for j, lam in enumerate(ratio_axis):
            z[i, j] = evaluate(inputs, float(lam))

    meta = {"kind": kind, "n": n, "sigma2": sigma2, "r": r, "vary": vary}
    if kind == "out_domain":
        meta["d_gen" if vary == "d_shift" else "d_shift"] = (
            d_gen if vary == "d_shift" else d_shift
        )
    return ContourGrid(x_axis=ratio_axis, y_axis=disc_axis, z=z, meta=meta)


def _fmt(value: float | None) -> str:
    return "" if value is None else format(value, ".17g")


def emit(result: SweepResult, path: str | Path, format: str = "csv") -> None:
    """Write a sweep result; identical results re-emit bit-identically."""
    path = Path(path)
    if format == "csv":
        lines = [",".join(CSV_COLUMNS)]
        for row in result.rows:
            lines.append(
                ",".join(
                    _fmt(v)
                    for v in (row.lam, row.empirical_error, row.bound_value,
                              row.bias2, row.variance)
                )
            )
        path.write_text("\n".join(lines) + "\n")
    elif format == "json":
        record = {
            "rows": [
                {
                    "lambda": row.lam,
                    "empirical_error": row.empirical_error,
                    "bound_value": row.bound_value,
                    "bias2": row.bias2,
                    "variance": row.variance,
                }
                for row in result.rows
            ],
            "lambda_empirical_opt": result.lambda_empirical_opt,
            "lambda_theory": result.lambda_theory,
            "seeds": list(result.seeds),
            "per_seed_errors": (
                None
                if result.per_seed_errors is None
                else result.per_seed_errors.tolist()
            ),
            "meta": result.meta,
        }
        path.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    else:
        raise ValueError(f"unknown format: {format!r}")


def emit_contour(grid: ContourGrid, path: str | Path, format: str = "csv") -> None:
    """Write a contour grid in long form (one row per grid cell)."""
    path = Path(path)
    y_name = (
        "shift_discrepancy"
        if grid.meta.get("vary") == "d_shift" and grid.meta.get("kind") == "out_domain"
        else "discrepancy"
    )
    if format == "csv":
        lines = [f"ratio,{y_name},bound"]
        for i, d in enumerate(grid.y_axis):
            for j, lam in enumerate(grid.x_axis):
                lines.append(
                    ",".join(_fmt(v) for v in (lam, d, grid.z[i, j]))
                )
        path.write_text("\n".join(lines) + "\n")
    elif format == "json":
        record = {
            "ratio_axis": grid.x_axis.tolist(),
            f"{y_name}_axis": grid.y_axis.tolist(),
            "bound": grid.z.tolist(),
            "meta": grid.meta,
        }
        path.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    else:
        raise ValueError(f"unknown format: {format!r}")


def read_sweep_csv(path: str | Path) -> list[dict]:
    """Parse an emitted sweep CSV back into a list of row dicts."""
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        rows = []
        for raw in reader:
            rows.append(
                {key: (float(v) if v != "" else None) for key, v in raw.items()}
            )
    return rows


_CONFIG_SCHEMA = {
    "mercer": {"r", "s", "s_prime", "t_f", "t_g"},
    "experiment": {"n", "sigma2", "seeds", "grid_size"},
    "grid": {"lo_exp", "hi_exp", "count"},
}


def load_config(path: str | Path) -> UcurveConfig:
    """Read a sweep configuration from a sectioned key-value file.

    Sections [mercer], [experiment], [grid]; unknown keys are rejected.
    A missing seed list defaults to 42 with a warning, so published runs
    should always pin seeds explicitly.
    """
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ValueError(f"cannot read config file: {path}")
    for section in parser.sections():
        if section not in _CONFIG_SCHEMA:
            raise ValueError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in _CONFIG_SCHEMA[section]:
                raise ValueError(f"unknown key {key!r} in section [{section}]")

    def get(section, key, cast, default=None, required=False):
        if parser.has_option(section, key):
            return cast(parser.get(section, key))
        if required:
            raise ValueError(f"missing required key {key!r} in [{section}]")
        return default

    values = dict(
        r=get("mercer", "r", float, required=True),
        s=get("mercer", "s", float, required=True),
        s_prime=get("mercer", "s_prime", float, required=True),
        t_f=get("mercer", "t_f", int, required=True),
        t_g=get("mercer", "t_g", int, required=True),
        n=get("experiment", "n", int, default=15),
        sigma2=get("experiment", "sigma2", float, default=0.1),
        grid_size=get("experiment", "grid_size", int, default=500),
        lambda_lo_exp=get("grid", "lo_exp", float, default=-10.0),
        lambda_hi_exp=get("grid", "hi_exp", float, default=10.0),
        lambda_count=get("grid", "count", int, default=50),
    )
    if parser.has_option("experiment", "seeds"):
        seeds = tuple(
            int(s) for s in parser.get("experiment", "seeds").split(",") if s.strip()
        )
    else:
        warnings.warn("no seeds in config; defaulting to seed 42", stacklevel=2)
        seeds = (42,)
    return UcurveConfig(seeds=seeds, **values)
