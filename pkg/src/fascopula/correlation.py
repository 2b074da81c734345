"""Spatial correlation matrices for a linear fluid antenna aperture.

A geometry of N ports spread uniformly over an aperture of W wavelengths
induces, under isotropic scattering, a coefficient-level correlation matrix
with entries J0(2*pi*(n - n')*W/(N - 1)). Squaring entrywise gives the
gain-level (squared-envelope) correlation; mapping the gain-level entries
through a symmetric Gauss hypergeometric ratio gives the envelope-level
correlation. Empirical estimators (plain Pearson and normal-scores Pearson)
close the loop from sampled ensembles back to matrices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .numerics import (
    bessel_j0,
    gauss_2f1_symmetric,
    psd_repair,
    psi_ratio,
    std_normal_quantile,
)

__all__ = [
    "LEVELS",
    "FasGeometry",
    "CorrelationMatrix",
    "jakes_matrix",
    "gain_correlation",
    "envelope_correlation",
    "normal_scores_correlation",
    "empirical_pearson",
    "write_matrix_csv",
]

LEVELS = ("coefficient", "gain", "envelope", "normal_scores")


@dataclass(frozen=True)
class FasGeometry:
    """Linear aperture: ``n_ports`` ports equally spaced over ``aperture`` wavelengths."""

    n_ports: int
    aperture: float

    def __post_init__(self):
        if not isinstance(self.n_ports, (int, np.integer)) or self.n_ports < 1:
            raise ValueError("n_ports must be a positive integer")
        if not np.isfinite(self.aperture) or self.aperture < 0:
            raise ValueError("aperture must be finite and >= 0")

    @property
    def port_spacing(self) -> float:
        """Spacing between adjacent ports in wavelengths (0 for a single port)."""
        if self.n_ports == 1:
            return 0.0
        return self.aperture / (self.n_ports - 1)


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric unit-diagonal correlation matrix tagged with its level."""

    level: str
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.level not in LEVELS:
            raise ValueError(f"level must be one of {LEVELS}, got {self.level!r}")
        arr = np.asarray(self.entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("entries must be a square matrix")
        if not np.all(np.isfinite(arr)):
            raise ValueError("entries must be finite")
        if np.max(np.abs(arr - arr.T)) > 1e-9:
            raise ValueError("entries must be symmetric")
        if np.max(np.abs(np.diag(arr) - 1.0)) > 0:
            raise ValueError("diagonal must be exactly 1")
        if np.max(np.abs(arr)) > 1.0 + 1e-9:
            raise ValueError("entries must lie in [-1, 1]")
        object.__setattr__(self, "entries", arr)

    @property
    def n_ports(self) -> int:
        return self.entries.shape[0]


def jakes_matrix(geom: FasGeometry) -> CorrelationMatrix:
    """Coefficient-level correlation of the uniform linear aperture.

    Entry (n, n') is J0(2*pi*(n - n')*W/(N - 1)); the result is symmetric
    Toeplitz with unit diagonal. A single-port geometry returns [[1.0]] so
    sweeps over N degrade gracefully to the fixed-antenna case.
    """
    n = geom.n_ports
    if n == 1:
        return CorrelationMatrix("coefficient", np.ones((1, 1)))
    idx = np.arange(n)
    lags = np.abs(idx[:, None] - idx[None, :]).astype(float)
    entries = bessel_j0(2.0 * np.pi * lags * geom.aperture / (n - 1))
    np.fill_diagonal(entries, 1.0)
    return CorrelationMatrix("coefficient", entries)


def gain_correlation(coeff: CorrelationMatrix) -> CorrelationMatrix:
    """Entrywise square of the coefficient-level matrix."""
    if coeff.level != "coefficient":
        raise ValueError("gain_correlation expects a coefficient-level matrix")
    return CorrelationMatrix("gain", np.square(coeff.entries))


def envelope_correlation(gain: CorrelationMatrix, m: float) -> CorrelationMatrix:
    """Map gain-level to envelope-level correlation entrywise.

    Each entry x in [0, 1] becomes (2F1(-1/2,-1/2; m; x) - 1)/(psi(m) - 1),
    a strictly increasing map fixing 0 and 1; the diagonal stays exactly 1.
    """
    if gain.level != "gain":
        raise ValueError("envelope_correlation expects a gain-level matrix")
    if m < 0.5:
        raise ValueError("m must be >= 0.5")
    span = psi_ratio(m) - 1.0
    entries = (gauss_2f1_symmetric(m, np.clip(gain.entries, 0.0, 1.0)) - 1.0) / span
    np.fill_diagonal(entries, 1.0)
    return CorrelationMatrix("envelope", np.clip(entries, 0.0, 1.0))


def _checked_columns(samples) -> np.ndarray:
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2:
        raise ValueError("samples must be a K x N matrix")
    k = arr.shape[0]
    if k < 100:
        raise ValueError("need at least 100 samples per port")
    if np.any(arr.std(axis=0) == 0.0):
        raise ValueError("degenerate column: a port has constant samples")
    return arr


def normal_scores_correlation(samples) -> CorrelationMatrix:
    """Pearson correlation of rank-transformed (normal-scores) columns.

    Each column is replaced by the standard normal quantile of rank/(K+1)
    (average rank on ties), estimating the covariance of the latent normal
    vector behind a Gaussian copula. The estimate is psd-repaired so it can
    be fed straight back into copula sampling or CDF evaluation.

    Accepts a ChannelEnsemble or a plain K x N array.
    """
    arr = _checked_columns(getattr(samples, "envelopes", samples))
    if arr.shape[1] < 2:
        raise ValueError("need at least two ports")
    k = arr.shape[0]
    ranks = np.apply_along_axis(rankdata, 0, arr)
    scores = std_normal_quantile(ranks / (k + 1.0))
    entries = np.corrcoef(scores, rowvar=False)
    entries = 0.5 * (entries + entries.T)
    np.fill_diagonal(entries, 1.0)
    return CorrelationMatrix("normal_scores", psd_repair(entries))


def empirical_pearson(samples, transform: str = "envelope") -> CorrelationMatrix:
    """Plain Pearson correlation of envelope (or squared-envelope) columns."""
    if transform not in ("envelope", "gain"):
        raise ValueError("transform must be 'envelope' or 'gain'")
    arr = _checked_columns(getattr(samples, "envelopes", samples))
    if transform == "gain":
        arr = np.square(arr)
    entries = np.corrcoef(arr, rowvar=False)
    if entries.ndim == 0:  # single column
        entries = np.ones((1, 1))
    entries = 0.5 * (entries + entries.T)
    np.fill_diagonal(entries, 1.0)
    np.clip(entries, -1.0, 1.0, out=entries)
    return CorrelationMatrix("gain" if transform == "gain" else "envelope", entries)


def write_matrix_csv(matrix: CorrelationMatrix, path, digits: int = 9) -> None:
    """Row-major CSV dump with a port-index header and a provenance comment."""
    entries = matrix.entries
    n = entries.shape[0]
    header = ",".join(f"port_{j + 1}" for j in range(n))
    meta = json.dumps({"level": matrix.level, "n_ports": n})
    with open(path, "w", newline="") as fh:
        fh.write(f"# {meta}\n")
        fh.write(header + "\n")
        for row in entries:
            fh.write(",".join(f"{v:.{digits}g}" for v in row) + "\n")
