"""Special functions and symmetric linear algebra shared by all other modules.

Everything here is a thin, domain-checked layer over scipy/numpy primitives:
the rest of the package goes through these wrappers so that input validation,
precision expectations, and array semantics live in one place. All functions
accept scalars or array_like and vectorize elementwise; all are pure and
thread-safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special as sp

__all__ = [
    "EigenDecomposition",
    "as_grid",
    "bessel_j0",
    "erf_inv",
    "std_normal_quantile",
    "regularized_lower_gamma",
    "gauss_2f1_symmetric",
    "psi_ratio",
    "sym_eigen",
    "psd_repair",
]


def _as_float_array(x, name: str):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {x!r}")
    return arr


def _maybe_scalar(arr, scalar_in: bool):
    return float(arr) if scalar_in else arr


def as_grid(points) -> np.ndarray:
    """Validate an evaluation grid: finite, strictly increasing abscissae."""
    g = _as_float_array(points, "grid")
    if g.ndim != 1 or g.size < 2:
        raise ValueError("grid must be a 1-D array with at least two points")
    if not np.all(np.diff(g) > 0):
        raise ValueError("grid must be strictly increasing")
    return g


def bessel_j0(x):
    """Bessel function of the first kind, order zero."""
    scalar = np.isscalar(x)
    arr = _as_float_array(x, "x")
    return _maybe_scalar(sp.j0(arr), scalar)


def erf_inv(p):
    """Inverse of the error function on (-1, 1)."""
    scalar = np.isscalar(p)
    arr = _as_float_array(p, "p")
    if np.any(np.abs(arr) >= 1.0):
        raise ValueError("erf_inv requires |p| < 1; clamp tail values first")
    return _maybe_scalar(sp.erfinv(arr), scalar)


def std_normal_quantile(u):
    """Standard normal quantile, computed as sqrt(2) * erf_inv(2u - 1).

    Parameters
    ----------
    u : array_like
        Probabilities strictly inside (0, 1). Callers that may produce exact
        0/1 (e.g. CDF values of tail envelopes) must clamp to
        [1e-16, 1 - 1e-16] beforehand.
    """
    scalar = np.isscalar(u)
    arr = _as_float_array(u, "u")
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError("std_normal_quantile requires 0 < u < 1")
    return _maybe_scalar(np.sqrt(2.0) * sp.erfinv(2.0 * arr - 1.0), scalar)


def regularized_lower_gamma(m, x):
    """Regularized lower incomplete gamma function P(m, x) in [0, 1]."""
    scalar = np.isscalar(m) and np.isscalar(x)
    m_arr = _as_float_array(m, "m")
    x_arr = _as_float_array(x, "x")
    if np.any(m_arr <= 0.0):
        raise ValueError("regularized_lower_gamma requires m > 0")
    if np.any(x_arr < 0.0):
        raise ValueError("regularized_lower_gamma requires x >= 0")
    return _maybe_scalar(sp.gammainc(m_arr, x_arr), scalar)


def gauss_2f1_symmetric(m, x):
    """Gauss hypergeometric 2F1(-1/2, -1/2; m; x) on x in [0, 1].

    This is the map taking a squared (gain-level) correlation to an
    unnormalized envelope-level correlation. It increases from 1 at x=0 to
    psi_ratio(m) at x=1 (Gauss's summation theorem applies since the
    parameter excess m + 1 is positive).
    """
    scalar = np.isscalar(m) and np.isscalar(x)
    m_arr = _as_float_array(m, "m")
    x_arr = _as_float_array(x, "x")
    if np.any(m_arr < 0.5):
        raise ValueError("gauss_2f1_symmetric requires m >= 0.5")
    if np.any(x_arr < 0.0) or np.any(x_arr > 1.0):
        raise ValueError("gauss_2f1_symmetric requires 0 <= x <= 1")
    return _maybe_scalar(sp.hyp2f1(-0.5, -0.5, m_arr, x_arr), scalar)


def psi_ratio(m):
    """Gamma-function ratio Gamma(m) * Gamma(m+1) / Gamma(m+1/2)^2.

    Supremum of ``gauss_2f1_symmetric(m, .)``; strictly greater than 1 and
    tending to 1 as m grows. Evaluated in log space for stability.
    """
    scalar = np.isscalar(m)
    arr = _as_float_array(m, "m")
    if np.any(arr < 0.5):
        raise ValueError("psi_ratio requires m >= 0.5")
    out = np.exp(sp.gammaln(arr) + sp.gammaln(arr + 1.0) - 2.0 * sp.gammaln(arr + 0.5))
    return _maybe_scalar(out, scalar)


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (descending) and matching orthonormal eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T


_SYMMETRY_TOL = 1e-12


def sym_eigen(matrix) -> EigenDecomposition:
    """Eigendecomposition of a symmetric real matrix, eigenvalues descending.

    Raises ValueError if the input is asymmetric beyond 1e-12 max-abs.
    """
    arr = _as_float_array(matrix, "matrix")
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("sym_eigen requires a square matrix")
    if np.max(np.abs(arr - arr.T)) > _SYMMETRY_TOL:
        raise ValueError("sym_eigen requires a symmetric matrix (max-abs asymmetry > 1e-12)")
    w, v = np.linalg.eigh(arr)
    order = np.argsort(w)[::-1]
    return EigenDecomposition(eigenvalues=w[order], eigenvectors=v[:, order])


def psd_repair(matrix, floor: float = 1e-10) -> np.ndarray:
    """Clip eigenvalues of a unit-diagonal symmetric matrix up to ``floor``.

    After clipping, the diagonal is rescaled back to exactly 1. Rescaling can
    pull the smallest eigenvalue slightly back under the floor, so clip and
    rescale alternate until the spectrum complies. A matrix that already
    satisfies min eigenvalue >= floor is returned unchanged, which makes the
    repair idempotent.
    """
    if floor < 0:
        raise ValueError("floor must be >= 0")
    arr = _as_float_array(matrix, "matrix")
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("psd_repair requires a square matrix")
    if np.max(np.abs(arr - arr.T)) > 1e-9:
        raise ValueError("psd_repair requires a symmetric matrix")
    if np.max(np.abs(np.diag(arr) - 1.0)) > 1e-9:
        raise ValueError("psd_repair requires a unit diagonal")

    # Clip a little above the floor: rescaling the diagonal back to 1 shifts
    # eigenvalues by a few ulps, which would otherwise chatter forever for
    # near-singular inputs whose smallest eigenvalue lands exactly at the
    # floor.
    target = 1.5 * floor + 16.0 * np.finfo(float).eps * arr.shape[0]
    current = arr
    for _ in range(100):
        w, v = np.linalg.eigh(current)
        if w.min() >= floor:
            return current
        rebuilt = (v * np.maximum(w, target)) @ v.T
        scale = np.sqrt(np.diag(rebuilt))
        rebuilt = rebuilt / np.outer(scale, scale)
        rebuilt = 0.5 * (rebuilt + rebuilt.T)
        np.fill_diagonal(rebuilt, 1.0)
        current = rebuilt
    raise np.linalg.LinAlgError("psd_repair did not converge")
