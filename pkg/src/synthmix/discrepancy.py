"""Coefficient-space distances between series functions.

The generator-fidelity discrepancy weights each squared coefficient gap
by the inverse squared eigenvalue,

    D(f, g)^2 = sum_j (c_j(f) - c_j(g))^2 / mu_j^2,

so mismatch in fast-decaying (rough) directions is penalized hardest.
Plain L2 and reproducing-kernel norms in the same basis live here too.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mercer import SeriesFunction

__all__ = ["DiscrepancyResult", "discrepancy", "rkhs_norm2", "l2_norm2"]


@dataclass(frozen=True)
class DiscrepancyResult:
    value: float
    terms_used: int


def _padded_pair(f: SeriesFunction, g: SeriesFunction):
    if f.spec != g.spec:
        raise ValueError("functions must share one eigensystem")
    t = max(f.n_terms, g.n_terms)
    a = np.zeros(t)
    b = np.zeros(t)
    a[: f.n_terms] = f.coeffs
    b[: g.n_terms] = g.coeffs
    return a, b, t


def discrepancy(f: SeriesFunction, g: SeriesFunction) -> DiscrepancyResult:
    """Eigenvalue-weighted distance between two series functions.

    Sums over j = 1..max(T_f, T_g) with absent coefficients taken as
    zero; exact for finitely supported functions.
    """
    a, b, t = _padded_pair(f, g)
    mu = f.spec.eigenvalues(t)
    value = float(np.sqrt(np.sum(((a - b) / mu) ** 2)))
    return DiscrepancyResult(value=value, terms_used=t)


def rkhs_norm2(f: SeriesFunction) -> float:
    """Squared kernel-space norm sum_j c_j^2 / mu_j."""
    mu = f.spec.eigenvalues(f.n_terms)
    return float(np.sum(f.coeffs**2 / mu))


def l2_norm2(f: SeriesFunction) -> float:
    """Squared coefficient norm sum_j c_j^2."""
    return float(np.sum(f.coeffs**2))
