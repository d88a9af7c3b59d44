"""Eigensystem, series evaluation, kernel matrices, and sampling."""

import numpy as np
import pytest

from synthmix.mercer import (
    EigenSpec,
    SeriesFunction,
    basis_eval,
    kernel_matrix,
    make_series,
    sample_training_set,
    series_eval,
)

# Term-by-term extended-precision summation of the reference target
# function (decay exponent 2, smoothness 0.8, 100 terms).
SERIES_AT_HALF = -0.1230054868992914856873
SERIES_AT_1P7 = -0.2417066428150285337336


def h1_spec(j_max=100):
    return EigenSpec(r=2.0, j_max=j_max)


class TestEigenSpec:
    def test_rejects_small_decay_exponent(self):
        with pytest.raises(ValueError):
            EigenSpec(r=0.49, j_max=10)
        EigenSpec(r=0.5, j_max=10)  # boundary allowed

    def test_rejects_bad_truncation_and_domain(self):
        with pytest.raises(ValueError):
            EigenSpec(r=1.0, j_max=0)
        with pytest.raises(ValueError):
            EigenSpec(r=1.0, j_max=5, domain_lo=2.0, domain_hi=2.0)

    def test_eigenvalues_strictly_decreasing_positive(self):
        mu = h1_spec().eigenvalues()
        assert np.all(mu > 0)
        assert np.all(np.diff(mu) < 0)

    def test_eigenvalue_law(self):
        spec = EigenSpec(r=1.5, j_max=4)
        np.testing.assert_allclose(
            spec.eigenvalues(), [2.0**-3, 3.0**-3, 4.0**-3, 5.0**-3]
        )


class TestBasisEval:
    def test_vanishes_at_origin(self):
        assert basis_eval(h1_spec(), 1, 0.0) == 0.0

    def test_quarter_period(self):
        np.testing.assert_allclose(basis_eval(h1_spec(), 1, 0.25), 1.0)

    def test_direct_evaluation_oracle(self):
        # sin(4*pi/3) by direct evaluation
        np.testing.assert_allclose(
            basis_eval(h1_spec(), 3, 1.0 / 3.0),
            -0.8660254037844386,
            rtol=1e-12,
        )

    def test_index_out_of_range(self):
        spec = h1_spec(j_max=10)
        with pytest.raises(ValueError):
            basis_eval(spec, 0, 0.5)
        with pytest.raises(ValueError):
            basis_eval(spec, 11, 0.5)

    def test_domain_check(self):
        with pytest.raises(ValueError):
            basis_eval(h1_spec(), 1, 3.5)


class TestSeriesEval:
    def test_zero_coefficients(self):
        f = SeriesFunction(np.zeros(5), h1_spec())
        assert series_eval(f, 1.234) == 0.0

    def test_single_coefficient_reduces_to_basis(self):
        f = SeriesFunction([1.0], h1_spec())
        np.testing.assert_allclose(series_eval(f, 0.25), 1.0)

    def test_term_by_term_summation_oracle(self):
        f = make_series(h1_spec(), s=0.8, T=100)
        np.testing.assert_allclose(series_eval(f, 0.5), SERIES_AT_HALF, rtol=1e-13)
        np.testing.assert_allclose(series_eval(f, 1.7), SERIES_AT_1P7, rtol=1e-13)

    def test_linearity_on_random_pairs(self):
        rng = np.random.default_rng(11)
        spec = h1_spec(j_max=30)
        for _ in range(20):
            a = SeriesFunction(rng.standard_normal(30), spec)
            b = SeriesFunction(rng.standard_normal(30), spec)
            x = rng.uniform(0, 3, size=7)
            combined = SeriesFunction(a.coeffs + b.coeffs, spec)
            np.testing.assert_allclose(
                series_eval(combined, x),
                series_eval(a, x) + series_eval(b, x),
                atol=1e-12,
            )

    def test_truncation_bounded_by_spec(self):
        with pytest.raises(ValueError):
            SeriesFunction(np.ones(11), h1_spec(j_max=10))

    def test_non_finite_coefficients_rejected(self):
        with pytest.raises(ValueError):
            SeriesFunction([1.0, np.nan], h1_spec())


class TestMakeSeries:
    def test_first_coefficient_power_law(self):
        f = make_series(h1_spec(), s=0.8, T=1)
        np.testing.assert_allclose(f.coeffs[0], 0.3298769776932236, rtol=1e-12)

    def test_tenth_coefficient(self):
        f = make_series(h1_spec(), s=1.5, T=10)
        np.testing.assert_allclose(f.coeffs[9], 7.513148009015778e-4, rtol=1e-12)

    def test_large_smoothness_kills_tail(self):
        f = make_series(h1_spec(), s=100.0, T=5)
        assert np.all(f.coeffs <= 2.0 ** (-100 * 2.0) + 1e-300)
        assert np.all(np.diff(f.coeffs) < 0)

    def test_truncation_validation(self):
        with pytest.raises(ValueError):
            make_series(h1_spec(j_max=10), s=1.0, T=11)
        with pytest.raises(ValueError):
            make_series(h1_spec(), s=0.0, T=5)


class TestKernelMatrix:
    def test_all_sines_vanish_at_zero(self):
        np.testing.assert_allclose(kernel_matrix(h1_spec(), [0.0]), [[0.0]])

    def test_duplicate_points_rank_one(self):
        k = kernel_matrix(h1_spec(), [1.1, 1.1])
        np.testing.assert_allclose(k, k[0, 0] * np.ones((2, 2)))

    def test_brute_force_summation_oracle(self):
        spec = h1_spec()
        xs = np.linspace(0, 3, 5)
        k = kernel_matrix(spec, xs)
        mu = spec.eigenvalues()
        for i in range(5):
            for m in range(5):
                expected = sum(
                    mu[j - 1]
                    * np.sin(np.pi * (j + 1) * xs[i])
                    * np.sin(np.pi * (j + 1) * xs[m])
                    for j in range(1, 101)
                )
                assert abs(k[i, m] - expected) < 1e-12

    def test_symmetry_and_numerical_psd(self):
        rng = np.random.default_rng(5)
        xs = rng.uniform(0, 3, size=12)
        k = kernel_matrix(h1_spec(), xs)
        assert np.max(np.abs(k - k.T)) <= 1e-14
        eigs = np.linalg.eigvalsh(k)
        assert eigs[0] >= -1e-10 * np.trace(k)

    def test_truncation_tail_bound(self):
        rng = np.random.default_rng(6)
        xs = rng.uniform(0, 3, size=8)
        k100 = kernel_matrix(EigenSpec(r=2.0, j_max=100), xs)
        k200 = kernel_matrix(EigenSpec(r=2.0, j_max=200), xs)
        tail = np.sum((np.arange(101, 201) + 1.0) ** -4.0)
        assert np.max(np.abs(k200 - k100)) <= tail

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            kernel_matrix(h1_spec(), [])


class TestSampleTrainingSet:
    def test_noiseless_observations_exact(self):
        f = make_series(h1_spec(), s=0.8, T=100)
        train = sample_training_set(f, 20, 0.0, seed=1)
        np.testing.assert_array_equal(train.ys, series_eval(f, train.xs))

    def test_same_seed_bitwise_identical(self):
        f = make_series(h1_spec(), s=0.8, T=100)
        a = sample_training_set(f, 15, 0.1, seed=42)
        b = sample_training_set(f, 15, 0.1, seed=42)
        np.testing.assert_array_equal(a.xs, b.xs)
        np.testing.assert_array_equal(a.ys, b.ys)

    def test_inputs_inside_domain(self):
        f = make_series(h1_spec(), s=0.8, T=10)
        train = sample_training_set(f, 200, 0.1, seed=9)
        assert np.all(train.xs >= 0.0) and np.all(train.xs <= 3.0)

    def test_noise_variance_law_of_large_numbers(self):
        f = make_series(h1_spec(), s=0.8, T=100)
        train = sample_training_set(f, 10000, 0.1, seed=7)
        residual = train.ys - series_eval(f, train.xs)
        assert 0.09 <= np.var(residual) <= 0.11

    def test_validation(self):
        f = make_series(h1_spec(), s=0.8, T=10)
        with pytest.raises(ValueError):
            sample_training_set(f, 0, 0.1, seed=1)
        with pytest.raises(ValueError):
            sample_training_set(f, 5, -0.1, seed=1)
