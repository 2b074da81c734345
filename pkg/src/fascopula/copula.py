"""Gaussian-copula distribution of the strongest-port envelope.

The peak envelope of an N-port fluid antenna is the componentwise maximum
of N dependent Nakagami variates. Under a Gaussian copula with covariance
R and identical marginals F, its CDF at r is the multivariate normal CDF
evaluated at equal upper limits phi_inv(F(r)):

    F_peak(r) = Phi_R(phi_inv(F(r)), ..., phi_inv(F(r)))

The engine behind Phi_R is a randomized quasi-Monte Carlo integrator using
the sequential-conditioning (separation-of-variables) transform: after a
Cholesky factorization, each coordinate integrates a conditional normal CDF
over the unit cube, so the integrand is smooth and bounded in [0, 1].
Points come from a Kronecker lattice (fractional parts of multiples of
square roots of primes) under a small number of independent random shifts;
the spread of the per-shift means gives the error estimate.

The density of the peak envelope has no closed form and is obtained by
central differencing of the CDF.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .correlation import CorrelationMatrix
from .nakagami import NakagamiParams, cdf
from .numerics import psd_repair, std_normal_quantile

__all__ = [
    "MvnSpec",
    "CdfResult",
    "mvn_cdf",
    "peak_cdf",
    "peak_pdf",
    "DEFAULT_TOL",
    "DEFAULT_BUDGET",
]

DEFAULT_TOL = 1e-4
DEFAULT_BUDGET = 1 << 22

N_SHIFTS = 8
FIRST_ROUND = 256

# Keep copula uniforms strictly inside (0, 1) so the normal quantile stays finite.
UNIFORM_FLOOR = 1e-300
UNIFORM_CEIL = 1.0 - 1e-16


@dataclass(frozen=True)
class MvnSpec:
    """Upper-orthant query P(X <= upper_limits) for X ~ N(0, covariance)."""

    covariance: CorrelationMatrix
    upper_limits: np.ndarray

    def __post_init__(self):
        limits = np.atleast_1d(np.asarray(self.upper_limits, dtype=float))
        if limits.ndim != 1 or limits.shape[0] != self.covariance.n_ports:
            raise ValueError("upper_limits length must match the covariance size")
        if np.isnan(limits).any():
            raise ValueError("upper_limits must not contain NaN")
        object.__setattr__(self, "upper_limits", limits)


@dataclass(frozen=True)
class CdfResult:
    value: float
    error_estimate: float
    n_evaluations: int


def _first_primes(count: int) -> np.ndarray:
    primes: list[int] = []
    n = 2
    while len(primes) < count:
        if all(n % p for p in primes if p * p <= n):
            primes.append(n)
        n += 1
    return np.asarray(primes, dtype=float)


def _conditioned_product(chol: np.ndarray, limits: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Sequential-conditioning integrand on a batch of unit-cube points w."""
    n, d = w.shape[0], limits.shape[0]
    e = np.full(n, ndtr(limits[0] / chol[0, 0]))
    f = e.copy()
    y = np.empty((n, d - 1))
    for i in range(1, d):
        u = np.clip(w[:, i - 1] * e, UNIFORM_FLOOR, UNIFORM_CEIL)
        y[:, i - 1] = ndtri(u)
        shifted = limits[i] - y[:, :i] @ chol[i, :i]
        e = ndtr(shifted / chol[i, i])
        f = f * e
    return f


def mvn_cdf(
    spec: MvnSpec,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> CdfResult:
    """Randomized-QMC estimate of the zero-mean multivariate normal CDF.

    Runs doubling rounds of a shifted Kronecker lattice until the 3-sigma
    spread of the shift means drops below ``tol`` or the evaluation budget
    is exhausted; in the latter case the returned ``error_estimate`` stays
    above ``tol``, which is the caller's signal of non-convergence. The
    result is deterministic for fixed (spec, tol, seed, budget).
    """
    if not 0.0 < tol <= 0.1:
        raise ValueError("tol must lie in (0, 0.1]")
    limits = spec.upper_limits
    if np.isneginf(limits).any():
        return CdfResult(value=0.0, error_estimate=0.0, n_evaluations=0)
    finite = ~np.isposinf(limits)
    if not finite.any():
        return CdfResult(value=1.0, error_estimate=0.0, n_evaluations=0)
    b = limits[finite]
    cov = spec.covariance.entries[np.ix_(finite, finite)]
    # Integrate tightest limits first; with equal limits this is a no-op.
    order = np.argsort(b)
    b = b[order]
    cov = cov[np.ix_(order, order)]
    d = b.shape[0]
    if d == 1:
        return CdfResult(value=float(ndtr(b[0])), error_estimate=0.0, n_evaluations=1)

    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ValueError(
            "covariance is not positive definite; apply psd_repair first"
        ) from exc

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    shifts = rng.random((N_SHIFTS, d - 1))
    roots = np.sqrt(_first_primes(d - 1))

    sums = np.zeros(N_SHIFTS)
    count = 0
    total = 0
    n_round = FIRST_ROUND
    k_offset = 0
    while True:
        k = np.arange(k_offset + 1, k_offset + n_round + 1, dtype=float)[:, None]
        base = k * roots[None, :]
        for s in range(N_SHIFTS):
            w = np.mod(base + shifts[s], 1.0)
            sums[s] += _conditioned_product(chol, b, w).sum()
        count += n_round
        total += n_round * N_SHIFTS
        means = sums / count
        value = float(means.mean())
        error = float(3.0 * means.std(ddof=1) / np.sqrt(N_SHIFTS))
        if error < tol or total >= budget:
            break
        k_offset += n_round
        n_round *= 2
    return CdfResult(
        value=float(np.clip(value, 0.0, 1.0)),
        error_estimate=error,
        n_evaluations=total,
    )


def peak_cdf(
    r: float,
    params: NakagamiParams,
    cov: CorrelationMatrix,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> float:
    """CDF of the maximum envelope over all ports at threshold r.

    ``cov`` is the copula covariance candidate: the coefficient-level matrix
    or the envelope-level matrix (the comparison this package exists to
    make). It is PSD-repaired before factorization, so entrywise-mapped
    matrices are accepted as-is.
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    marginal = float(np.clip(cdf(params, r), 1e-16, 1.0 - 1e-16))
    limit = std_normal_quantile(marginal)
    repaired = CorrelationMatrix(
        level=cov.level, entries=psd_repair(cov.entries)
    )
    spec = MvnSpec(
        covariance=repaired,
        upper_limits=np.full(cov.n_ports, limit),
    )
    return float(np.clip(mvn_cdf(spec, tol=tol, seed=seed).value, 0.0, 1.0))


def peak_pdf(
    r: float,
    params: NakagamiParams,
    cov: CorrelationMatrix,
    tol: float = 1e-3,
    seed: int = 0,
    h: float | None = None,
) -> float:
    """Density of the peak envelope via central differencing of peak_cdf.

    The inner CDF tolerance is tightened to tol*h so the difference quotient
    does not amplify integration noise above ``tol``.
    """
    if h is None:
        h = 1e-3 * np.sqrt(params.mu)
    if h <= 0:
        raise ValueError("h must be positive")
    if r <= h:
        raise ValueError("r must exceed the difference step h")
    inner_tol = max(tol * h, 1e-12)
    hi = peak_cdf(r + h, params, cov, tol=inner_tol, seed=seed)
    lo = peak_cdf(r - h, params, cov, tol=inner_tol, seed=seed)
    return (hi - lo) / (2.0 * h)
