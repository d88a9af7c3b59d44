"""Acceptance suite: one test per exit criterion, at stated tolerances.

Each test enforces its runtime budget; the conftest hook prints a
PASS/FAIL line per criterion.
"""

import json
import math
import time

import numpy as np

from synthmix.bounds import (
    BoundParams,
    KernelBoundInputs,
    domain_shift_gap_bound,
    golden_section_min,
    kernel_bound,
    lambda_star_numeric,
    mixed_gap_bound,
    rho,
    traditional_plan,
)
from synthmix.discrepancy import discrepancy
from synthmix.harness import (
    UcurveConfig,
    emit,
    read_sweep_csv,
    run_contour,
    run_ucurve,
)
from synthmix.krr import bias_variance_mc, fit
from synthmix.mercer import (
    EigenSpec,
    kernel_matrix,
    make_series,
    sample_training_set,
)
from synthmix.spectral import (
    ImageMatrix,
    fit_decay_exponent,
    power_spectrum,
    rapsd,
    spectral_distance,
)

H1_MISMATCH = dict(r=2.0, s=0.8, s_prime=1.5, t_f=100, t_g=10, n=15, sigma2=0.1)
H1_MATCHED = dict(r=2.0, s=0.8, s_prime=0.8, t_f=100, t_g=100, n=15, sigma2=0.1)


def dual_objective(k, y, n, lam, alpha, beta):
    r = y - k @ alpha
    d = alpha - beta
    return float(r @ r / n + lam * d @ (k @ d))


def gd_oracle(k, y, n, lam, beta, steps=20000):
    """Independent long-run gradient descent on the dual quadratic."""
    lam_n = n * lam
    top = float(np.linalg.eigvalsh(k)[-1])
    step = 1.0 / (2.0 * top * top / n + 2.0 * lam * top)
    alpha = np.zeros_like(y)
    eye = np.eye(n)
    for _ in range(steps):
        grad = (2.0 / n) * (k @ ((k + lam_n * eye) @ alpha - y - lam_n * beta))
        alpha = alpha - step * grad
    return alpha


def power_law_field(size, r0, seed):
    """Field synthesized by inverse transform with amplitude ~ k^(-r0)."""
    rng = np.random.default_rng(seed)
    u = np.fft.fftfreq(size) * size
    k = np.hypot.outer(u, u)
    amp = np.where(k > 0, np.maximum(k, 1e-12) ** (-r0), 0.0)
    spec = amp * (
        rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    )
    return np.fft.ifft2(spec).real


def test_criterion_1_solver_oracle_equivalence():
    """criterion 1: closed-form solver ties the gradient-descent oracle"""
    t0 = time.monotonic()
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.integers(5, 21))
        t = int(rng.integers(10, 51))
        r = float(rng.uniform(0.5, 3.0))
        lam = float(10 ** rng.uniform(-4, 1))
        spec = EigenSpec(r=r, j_max=t)
        f_star = make_series(spec, s=float(rng.uniform(0.5, 2.0)), T=t)
        g = make_series(spec, s=float(rng.uniform(0.5, 2.0)), T=max(1, t // 2))
        train = sample_training_set(f_star, n, 0.1, seed=int(rng.integers(1 << 30)))
        sol = fit(spec, train, g, lam)
        assert sol.stationarity_residual <= 1e-8 * (1 + np.linalg.norm(train.ys))
        k = kernel_matrix(spec, train.xs)
        alpha_gd = gd_oracle(k, train.ys, n, lam, sol.beta)
        obj_closed = dual_objective(k, train.ys, n, lam, sol.alpha, sol.beta)
        obj_gd = dual_objective(k, train.ys, n, lam, alpha_gd, sol.beta)
        assert obj_closed <= obj_gd * (1 + 1e-8) + 1e-300
    assert time.monotonic() - t0 < 5.0


def test_criterion_2_ucurve_reproduction():
    """criterion 2: mismatch row shows a U-curve near the planned optimum"""
    t0 = time.monotonic()
    cfg = UcurveConfig(**H1_MISMATCH, seeds=(42, 43, 44))
    res = run_ucurve(cfg)
    err = res.column("empirical_error")
    i = int(np.argmin(err))
    assert 0 < i < len(err) - 1
    assert err[i] < err[0] and err[i] < err[-1]
    gap = abs(math.log10(res.lambda_theory) - math.log10(res.lambda_empirical_opt))
    assert gap <= 2.0
    assert time.monotonic() - t0 < 30.0


def test_criterion_3_matched_generator_control():
    """criterion 3: matched generator shows no U-curve and zero discrepancy"""
    t0 = time.monotonic()
    cfg = UcurveConfig(**H1_MATCHED, seeds=(42, 43, 44))
    res = run_ucurve(cfg)
    err = res.column("empirical_error")
    assert err[-1] <= err[0]
    spec = cfg.eigen_spec()
    d = discrepancy(make_series(spec, 0.8, 100), make_series(spec, 0.8, 100))
    assert d.value == 0.0
    assert res.meta["d_gen"] == 0.0
    assert time.monotonic() - t0 < 30.0


def test_criterion_4_planner_consistency():
    """criterion 4: numeric planner is stationary and beats a fine grid scan"""
    t0 = time.monotonic()
    rng = np.random.default_rng(2024)
    grid_u = np.linspace(-12.0, 12.0, 1000)
    for _ in range(200):
        inputs = KernelBoundInputs(
            n=int(rng.integers(5, 1001)),
            r=float(rng.uniform(0.5, 3.0)),
            sigma2=float(rng.uniform(0.0, 1.0)),
            d_gen=float(10 ** rng.uniform(-1.0, 1.0)),
        )
        lam = lambda_star_numeric(inputs).lambda_star
        h = lam * 6e-6
        deriv = (
            kernel_bound(inputs, lam + h) - kernel_bound(inputs, lam - h)
        ) / (2 * h)
        assert abs(deriv) <= 1e-6
        grid_min = min(kernel_bound(inputs, math.exp(u)) for u in grid_u)
        assert kernel_bound(inputs, lam) <= grid_min * (1 + 1e-9)
    assert time.monotonic() - t0 < 10.0


def test_criterion_5_traditional_bound_suite():
    """criterion 5: classical mixing plan matches its numeric optimum"""
    t0 = time.monotonic()
    rng = np.random.default_rng(99)
    for _ in range(100):
        c = float(10 ** rng.uniform(-1, 1))
        n = int(rng.integers(10, 1000))
        m = int(n + rng.integers(1, 100000))
        lo, hi = c / math.sqrt(m), c / math.sqrt(n)
        ipm = float(rng.uniform(lo * 1.001, hi * 0.999))
        plan = traditional_plan(c, n, m, ipm)
        alpha_num, _ = golden_section_min(
            lambda a: rho(a, c, n, m, ipm), 0.0, 1.0, n_scan=401
        )
        assert abs(plan.alpha_star - alpha_num) <= 1e-6

    plan = traditional_plan(1.0, 100, 250, ipm=1.0 / math.sqrt(100))
    assert plan.decision == "use_none" and plan.alpha_star == 0.0
    plan = traditional_plan(1.0, 100, 10000, ipm=1.0 / math.sqrt(10000))
    assert plan.decision == "use_all" and plan.alpha_star == 1.0
    plan = traditional_plan(2.0, 64, 1000, ipm=2 * 2.0 / math.sqrt(64))
    assert plan.m_bal == 0.0
    assert time.monotonic() - t0 < 5.0


def test_criterion_6_bias_variance_identity():
    """criterion 6: Monte Carlo risk splits into bias^2 plus variance"""
    t0 = time.monotonic()
    configs = [
        (EigenSpec(r=2.0, j_max=60), 0.8, 60, 1.5, 10, 0.1),
        (EigenSpec(r=1.0, j_max=40), 1.0, 40, 2.0, 8, 0.3),
    ]
    for spec, s, t_f, s_prime, t_g, sigma2 in configs:
        f_star = make_series(spec, s, t_f)
        g = make_series(spec, s_prime, t_g)
        for lam in (1e-3, 0.1, 10.0):
            rep = bias_variance_mc(
                spec, f_star, g, 15, sigma2, lam, replicates=200, seed=5,
                grid_size=300,
            )
            assert abs(rep.risk - rep.bias2 - rep.variance) <= max(
                3 * rep.mc_std_err, 1e-12
            )
    spec, s, t_f, s_prime, t_g, _ = configs[0]
    noiseless = bias_variance_mc(
        make_series(spec, s, t_f).spec,
        make_series(spec, s, t_f),
        make_series(spec, s_prime, t_g),
        15, 0.0, 0.1, replicates=200, seed=5, grid_size=300,
    )
    assert noiseless.variance <= 1e-12
    assert time.monotonic() - t0 < 60.0


def test_criterion_7_stability_bound_shape():
    """criterion 7: mixed-loss gap bound is U-shaped, monotone at w2 = 0"""
    t0 = time.monotonic()
    p = BoundParams()
    lams = np.linspace(1e-4, 1 - 1e-4, 500)
    vals = np.array([mixed_gap_bound(p, l, 200, 2.0, 0.05) for l in lams])
    i = int(np.argmin(vals))
    assert 0 < i < len(lams) - 1
    assert vals[i] < vals[0] and vals[i] < vals[-1]

    lams = np.linspace(1e-3, 1 - 1e-3, 200)
    vals = np.array([mixed_gap_bound(p, l, 100, 0.0, 0.1) for l in lams])
    assert np.all(np.diff(vals) < 0)
    assert time.monotonic() - t0 < 5.0


def test_criterion_8_domain_shift_ordering():
    """criterion 8: closer synthetic data earns a larger mixing weight"""
    t0 = time.monotonic()
    p = BoundParams()
    grid = np.linspace(1e-6, 1 - 1e-6, 4001)

    def argmin_lam(w2_ts, w2_src):
        vals = [domain_shift_gap_bound(p, l, 100, w2_ts, w2_src, 0.1) for l in grid]
        return grid[int(np.argmin(vals))]

    synth_close = argmin_lam(0.5, 2.0)
    source_close = argmin_lam(2.0, 0.5)
    assert synth_close > source_close
    assert time.monotonic() - t0 < 5.0


def test_criterion_9_spectral_pipeline():
    """criterion 9: spectral pipeline recovers the decay exponent"""
    t0 = time.monotonic()
    r_hats = [
        fit_decay_exponent(rapsd(ImageMatrix(power_law_field(128, 1.0, seed)))).r_hat
        for seed in range(20)
    ]
    assert abs(np.mean(r_hats) - 1.0) <= 0.1

    rng = np.random.default_rng(1)
    imgs = [ImageMatrix(rng.standard_normal((32, 32)), str(i)) for i in range(3)]
    assert spectral_distance(imgs, list(imgs)) == 0.0

    for trial in range(10):
        shape = (int(rng.integers(8, 64)), int(rng.integers(8, 64)))
        pixels = rng.standard_normal(shape)
        spectrum = power_spectrum(pixels)
        centered = pixels - pixels.mean()
        expected = pixels.size * np.sum(centered**2)
        assert abs(spectrum.sum() - expected) <= 1e-6 * expected
    assert time.monotonic() - t0 < 30.0


def test_criterion_10_contour_grids():
    """criterion 10: contour grids show the planned error-surface shape"""
    t0 = time.monotonic()
    ratio_axis = np.logspace(-2, 2, 41)
    grid = run_contour(
        "in_domain", ratio_axis, [0.0, 0.5, 2.0, 8.0], n=15, sigma2=0.1, r=1.0
    )
    for i, d in enumerate(grid.y_axis):
        signs = np.sign(np.diff(grid.z[i]))
        changes = int(np.sum(np.abs(np.diff(signs)) > 0))
        if d == 0:
            assert np.all(np.diff(grid.z[i]) < 0)
        else:
            assert changes == 1

    out = run_contour(
        "out_domain", ratio_axis, np.linspace(0, 8, 9),
        n=15, sigma2=0.1, r=1.0, d_gen=1.0, vary="d_shift",
    )
    assert np.all(np.diff(out.z, axis=0) >= 0)
    assert time.monotonic() - t0 < 10.0


def test_criterion_11_reproducibility_and_io(tmp_path):
    """criterion 11: seeds pin results bitwise and files round-trip losslessly"""
    cfg = UcurveConfig(
        r=2.0, s=0.8, s_prime=1.5, t_f=40, t_g=10, n=12,
        lambda_lo_exp=-6.0, lambda_hi_exp=6.0, lambda_count=9,
        grid_size=200, seeds=(42, 43),
    )
    paths = []
    for jobs in (1, 3):
        res = run_ucurve(cfg, jobs=jobs)
        path = tmp_path / f"sweep_jobs{jobs}.csv"
        emit(res, path, format="csv")
        paths.append(path)
    assert paths[0].read_bytes() == paths[1].read_bytes()

    res = run_ucurve(cfg)
    csv_path = tmp_path / "sweep.csv"
    emit(res, csv_path, format="csv")
    for parsed, row in zip(read_sweep_csv(csv_path), res.rows):
        assert parsed["lambda"] == row.lam
        assert parsed["empirical_error"] == row.empirical_error
        assert parsed["bound_value"] == row.bound_value

    json_path = tmp_path / "sweep.json"
    emit(res, json_path, format="json")
    record = json.loads(json_path.read_text())
    for parsed, row in zip(record["rows"], res.rows):
        assert parsed["lambda"] == row.lam
        assert parsed["empirical_error"] == row.empirical_error
    np.testing.assert_array_equal(
        np.array(record["per_seed_errors"]), res.per_seed_errors
    )
