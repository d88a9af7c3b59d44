"""Truncated spectral kernel on an interval: sine eigenbasis, series
functions, kernel matrices, and noisy training-set sampling.

The kernel is defined through its eigenexpansion

    K(x, x') = sum_{j=1}^{j_max} mu_j * phi_j(x) * phi_j(x'),

with eigenvalues mu_j = (j+1)^(-2r) and eigenfunctions
phi_j(x) = sin(pi*(j+1)*x).  Everything downstream (regression,
discrepancy, bound evaluation) is expressed in this basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EigenSpec",
    "SeriesFunction",
    "TrainingSet",
    "basis_eval",
    "series_eval",
    "make_series",
    "kernel_matrix",
    "kernel_cross",
    "sample_training_set",
]

MIN_DECAY_EXPONENT = 0.5


@dataclass(frozen=True)
class EigenSpec:
    """Eigensystem of the truncated kernel.

    r is the eigendecay exponent (mu_j decays like (j+1)^(-2r)), j_max the
    truncation order, and [domain_lo, domain_hi] the input interval.
    """

    r: float
    j_max: int
    domain_lo: float = 0.0
    domain_hi: float = 3.0

    def __post_init__(self):
        if self.r < MIN_DECAY_EXPONENT:
            raise ValueError(
                f"decay exponent r must be >= {MIN_DECAY_EXPONENT}, got {self.r}"
            )
        if self.j_max < 1:
            raise ValueError(f"j_max must be >= 1, got {self.j_max}")
        if not self.domain_lo < self.domain_hi:
            raise ValueError(
                f"empty domain: [{self.domain_lo}, {self.domain_hi}]"
            )

    def eigenvalues(self, count: int | None = None) -> np.ndarray:
        """mu_j = (j+1)^(-2r) for j = 1..count (default: j_max)."""
        count = self.j_max if count is None else count
        j = np.arange(1, count + 1, dtype=float)
        return (j + 1.0) ** (-2.0 * self.r)

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all((x >= self.domain_lo) & (x <= self.domain_hi)))

    def grid(self, size: int) -> np.ndarray:
        """Uniform grid of `size` points including both endpoints."""
        if size < 2:
            raise ValueError(f"grid size must be >= 2, got {size}")
        return np.linspace(self.domain_lo, self.domain_hi, size)


@dataclass(frozen=True)
class SeriesFunction:
    """Finite expansion sum_{j=1}^{T} coeffs[j-1] * phi_j in a spec's basis."""

    coeffs: np.ndarray
    spec: EigenSpec

    def __post_init__(self):
        coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if coeffs.ndim != 1:
            raise ValueError("coefficients must be a 1-D sequence")
        if coeffs.size > self.spec.j_max:
            raise ValueError(
                f"{coeffs.size} coefficients exceed truncation order "
                f"j_max={self.spec.j_max}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def n_terms(self) -> int:
        return self.coeffs.size

    def __call__(self, x):
        return series_eval(self, x)


@dataclass(frozen=True)
class TrainingSet:
    """N input/observation pairs with the noise variance and seed used."""

    xs: np.ndarray
    ys: np.ndarray
    sigma2: float
    seed: int

    def __post_init__(self):
        xs = np.atleast_1d(np.asarray(self.xs, dtype=float))
        ys = np.atleast_1d(np.asarray(self.ys, dtype=float))
        if xs.size != ys.size or xs.size < 1:
            raise ValueError("xs and ys must have equal length N >= 1")
        if self.sigma2 < 0:
            raise ValueError(f"noise variance must be >= 0, got {self.sigma2}")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self) -> int:
        return self.xs.size


def _check_index(spec: EigenSpec, j: int) -> None:
    if not 1 <= j <= spec.j_max:
        raise ValueError(f"basis index {j} outside 1..{spec.j_max}")


def _check_domain(spec: EigenSpec, x) -> None:
    if not spec.contains(x):
        raise ValueError(
            f"input outside domain [{spec.domain_lo}, {spec.domain_hi}]"
        )


def basis_eval(spec: EigenSpec, j: int, x):
    """Eigenfunction phi_j(x) = sin(pi*(j+1)*x); scalar or array x."""
    _check_index(spec, j)
    _check_domain(spec, x)
    return np.sin(np.pi * (j + 1) * np.asarray(x, dtype=float))


def basis_matrix(spec: EigenSpec, xs, count: int | None = None) -> np.ndarray:
    """Matrix Phi with Phi[i, j-1] = phi_j(xs[i]) for j = 1..count.

    No domain check; internal building block for kernel and series
    evaluation which validate their own inputs.
    """
    count = spec.j_max if count is None else count
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    j = np.arange(1, count + 1)
    return np.sin(np.pi * np.outer(xs, j + 1))


def series_eval(f: SeriesFunction, x):
    """Evaluate sum_j c_j * phi_j(x); scalar in -> scalar out."""
    _check_domain(f.spec, x)
    phi = basis_matrix(f.spec, x, count=f.n_terms)
    out = phi @ f.coeffs
    return float(out[0]) if np.isscalar(x) or np.ndim(x) == 0 else out


def make_series(spec: EigenSpec, s: float, T: int) -> SeriesFunction:
    """Series with polynomially decaying coefficients c_j = (j+1)^(-r*s)."""
    if s <= 0:
        raise ValueError(f"smoothness exponent s must be > 0, got {s}")
    if not 1 <= T <= spec.j_max:
        raise ValueError(f"truncation T={T} outside 1..{spec.j_max}")
    j = np.arange(1, T + 1, dtype=float)
    return SeriesFunction((j + 1.0) ** (-spec.r * s), spec)


def kernel_matrix(spec: EigenSpec, xs) -> np.ndarray:
    """Gram matrix K[i, k] = sum_j mu_j phi_j(xs[i]) phi_j(xs[k]).

    Computed as Phi diag(mu) Phi^T and symmetrized; positive semidefinite
    up to roundoff.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if xs.size == 0:
        raise ValueError("xs must be nonempty")
    phi = basis_matrix(spec, xs)
    k = (phi * spec.eigenvalues()) @ phi.T
    return 0.5 * (k + k.T)


def kernel_cross(spec: EigenSpec, xs_a, xs_b) -> np.ndarray:
    """Rectangular kernel matrix K[i, k] = K(xs_a[i], xs_b[k])."""
    phi_a = basis_matrix(spec, xs_a)
    phi_b = basis_matrix(spec, xs_b)
    return (phi_a * spec.eigenvalues()) @ phi_b.T


def sample_training_set(
    f: SeriesFunction, N: int, sigma2: float, seed: int
) -> TrainingSet:
    """Draw xs uniformly on the domain and ys = f(xs) + Gaussian noise.

    The same seed reproduces the same sample bit for bit.
    """
    if N < 1:
        raise ValueError(f"sample count N must be >= 1, got {N}")
    if sigma2 < 0:
        raise ValueError(f"noise variance must be >= 0, got {sigma2}")
    rng = np.random.default_rng(seed)
    spec = f.spec
    xs = rng.uniform(spec.domain_lo, spec.domain_hi, size=N)
    noise = rng.normal(0.0, np.sqrt(sigma2), size=N) if sigma2 > 0 else 0.0
    ys = series_eval(f, xs) + noise
    return TrainingSet(xs=xs, ys=ys, sigma2=sigma2, seed=seed)
