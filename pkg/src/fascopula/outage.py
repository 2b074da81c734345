"""Outage probability of the fluid antenna link.

The link is in outage when even the best port's envelope falls below the
threshold radius sqrt(gamma_th / gamma), where gamma is the average
transmit SNR and gamma_th the decoding threshold (both supplied in dB).
Three routes are provided: copula theory with either covariance candidate
(coefficient-level or envelope-level), a Monte Carlo benchmark on the
physically constructed ensemble, and the single-antenna baseline whose
outage is just the Nakagami marginal CDF. Curve builders sweep an SNR grid
with one derived seed per point, so results are reproducible for any
thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .chan_gen import GeneratorConfig, derive_seed, physical_envelope_chunks
from .copula import DEFAULT_TOL, peak_cdf
from .correlation import (
    CorrelationMatrix,
    FasGeometry,
    envelope_correlation,
    gain_correlation,
    jakes_matrix,
)
from .nakagami import NakagamiParams, cdf
from .numerics import psd_repair

__all__ = [
    "MATRIX_CHOICES",
    "METHODS",
    "MIN_MC_SAMPLES",
    "OutageQuery",
    "OutageCurve",
    "db_to_linear",
    "copula_covariance",
    "op_theory",
    "op_monte_carlo",
    "op_monte_carlo_paired",
    "op_tas",
    "adaptive_sample_count",
    "theory_curve",
    "monte_carlo_curves",
    "tas_theory_curve",
    "write_curve_csv",
]

MATRIX_CHOICES = ("coefficient", "envelope")
METHODS = ("mc_fas", "theory_coeff", "theory_enve", "tas_theory", "tas_mc")

MIN_MC_SAMPLES = 10_000


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


@dataclass(frozen=True)
class OutageQuery:
    snr_db: float
    threshold_db: float
    geom: FasGeometry
    params: NakagamiParams

    def __post_init__(self):
        if not (np.isfinite(self.snr_db) and np.isfinite(self.threshold_db)):
            raise ValueError("snr_db and threshold_db must be finite")

    def threshold_radius(self) -> float:
        """Envelope level below which the link is in outage."""
        return math.sqrt(db_to_linear(self.threshold_db) / db_to_linear(self.snr_db))


@dataclass(frozen=True)
class OutageCurve:
    method: str
    points: tuple
    meta: dict

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        pts = tuple((float(s), float(p)) for s, p in self.points)
        if not pts:
            raise ValueError("a curve needs at least one point")
        snrs = [s for s, _ in pts]
        if any(b < a for a, b in zip(snrs, snrs[1:])):
            raise ValueError("points must be sorted by snr_db")
        if any(not 0.0 <= p <= 1.0 for _, p in pts):
            raise ValueError("outage probabilities must lie in [0, 1]")
        object.__setattr__(self, "points", pts)

    @property
    def snr_db(self) -> np.ndarray:
        return np.asarray([s for s, _ in self.points])

    @property
    def op(self) -> np.ndarray:
        return np.asarray([p for _, p in self.points])


def copula_covariance(
    geom: FasGeometry, params: NakagamiParams, matrix_choice: str
) -> CorrelationMatrix:
    """Covariance candidate for the peak-envelope copula.

    "coefficient" uses the complex-coefficient correlation matrix directly;
    "envelope" pushes it through the squared-then-hypergeometric map and
    repairs the result to PSD.
    """
    if matrix_choice not in MATRIX_CHOICES:
        raise ValueError(f"matrix_choice must be one of {MATRIX_CHOICES}")
    coeff = jakes_matrix(geom)
    if matrix_choice == "coefficient":
        return coeff
    enve = envelope_correlation(gain_correlation(coeff), params.m)
    return CorrelationMatrix(level=enve.level, entries=psd_repair(enve.entries))


def op_theory(
    q: OutageQuery,
    matrix_choice: str,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> float:
    """Copula-model outage probability with the chosen covariance candidate."""
    cov = copula_covariance(q.geom, q.params, matrix_choice)
    return peak_cdf(q.threshold_radius(), q.params, cov, tol=tol, seed=seed)


def _binomial_estimate(events: int, n_samples: int) -> tuple[float, float]:
    p = events / n_samples
    return p, math.sqrt(p * (1.0 - p) / n_samples)


def op_monte_carlo_paired(
    q: OutageQuery, K: int, seed: int = 0
) -> dict[str, tuple[float, float]]:
    """FAS and single-port outage estimated from one shared ensemble.

    Sharing samples makes the diversity ordering exact draw-for-draw: the
    port maximum is never below port 1, so every FAS outage event is also a
    single-port outage event and op_fas <= op_tas holds with probability
    one, not just in expectation. Returns {"fas": (op, stderr),
    "tas": (op, stderr)}.
    """
    K = int(K)
    if K < MIN_MC_SAMPLES:
        raise ValueError(f"K must be at least {MIN_MC_SAMPLES}")
    rhat = q.threshold_radius()
    cfg = GeneratorConfig(geom=q.geom, params=q.params, seed=int(seed), n_samples=K)
    fas_events = 0
    tas_events = 0
    for _, chunk in physical_envelope_chunks(cfg):
        fas_events += int(np.count_nonzero(chunk.max(axis=1) < rhat))
        tas_events += int(np.count_nonzero(chunk[:, 0] < rhat))
    return {
        "fas": _binomial_estimate(fas_events, K),
        "tas": _binomial_estimate(tas_events, K),
    }


def op_monte_carlo(q: OutageQuery, K: int, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo outage benchmark on the physical ensemble.

    Returns the outage frequency and its binomial standard error
    sqrt(p(1-p)/K).
    """
    return op_monte_carlo_paired(q, K, seed)["fas"]


def op_tas(q: OutageQuery) -> float:
    """Single-antenna baseline: outage is the marginal CDF at the threshold radius."""
    return float(cdf(q.params, q.threshold_radius()))


def adaptive_sample_count(
    pilot_op: float,
    minimum: int = 1_000_000,
    cap: int = 100_000_000,
    target_events: int = 100,
) -> int:
    """Sample count that expects ``target_events`` outage events at the pilot rate."""
    if pilot_op <= 0.0:
        return int(cap)
    return int(min(max(minimum, target_events / pilot_op), cap))


def _map_indexed(fn, n: int, threads: int) -> list:
    if threads <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))


def _sorted_grid(snr_grid_db) -> list[float]:
    grid = sorted(float(s) for s in snr_grid_db)
    if not grid:
        raise ValueError("snr grid must not be empty")
    return grid


def theory_curve(
    base: OutageQuery,
    snr_grid_db,
    matrix_choice: str,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    threads: int = 1,
) -> OutageCurve:
    grid = _sorted_grid(snr_grid_db)
    cov = copula_covariance(base.geom, base.params, matrix_choice)

    def one(i: int) -> float:
        q = replace(base, snr_db=grid[i])
        return peak_cdf(
            q.threshold_radius(), base.params, cov, tol=tol, seed=derive_seed(seed, i)
        )

    ops = _map_indexed(one, len(grid), threads)
    method = "theory_coeff" if matrix_choice == "coefficient" else "theory_enve"
    return OutageCurve(
        method=method,
        points=tuple(zip(grid, ops)),
        meta={"tol": tol, "seed": int(seed)},
    )


def monte_carlo_curves(
    base: OutageQuery,
    snr_grid_db,
    K: int = 1_000_000,
    seed: int = 0,
    threads: int = 1,
    adaptive: bool = False,
    pilot_tol: float = 1e-3,
) -> tuple[OutageCurve, OutageCurve]:
    """(FAS benchmark, single-port benchmark) on shared per-point ensembles.

    With ``adaptive`` set, each point's sample count grows as needed to
    expect about 100 outage events, using the envelope-level theory value
    as the pilot rate.
    """
    grid = _sorted_grid(snr_grid_db)
    if adaptive:
        cov = copula_covariance(base.geom, base.params, "envelope")

        def pilot(i: int) -> float:
            q = replace(base, snr_db=grid[i])
            return peak_cdf(
                q.threshold_radius(),
                base.params,
                cov,
                tol=pilot_tol,
                seed=derive_seed(seed, i, 1),
            )

        sample_counts = [
            adaptive_sample_count(p, minimum=max(int(K), MIN_MC_SAMPLES))
            for p in _map_indexed(pilot, len(grid), threads)
        ]
    else:
        sample_counts = [int(K)] * len(grid)

    def one(i: int) -> dict:
        q = replace(base, snr_db=grid[i])
        return op_monte_carlo_paired(q, sample_counts[i], derive_seed(seed, i))

    results = _map_indexed(one, len(grid), threads)
    curves = []
    for method, key in (("mc_fas", "fas"), ("tas_mc", "tas")):
        curves.append(
            OutageCurve(
                method=method,
                points=tuple((grid[i], results[i][key][0]) for i in range(len(grid))),
                meta={
                    "K": tuple(sample_counts),
                    "seed": int(seed),
                    "stderr": tuple(results[i][key][1] for i in range(len(grid))),
                },
            )
        )
    return curves[0], curves[1]


def tas_theory_curve(base: OutageQuery, snr_grid_db) -> OutageCurve:
    grid = _sorted_grid(snr_grid_db)
    points = tuple((s, op_tas(replace(base, snr_db=s))) for s in grid)
    return OutageCurve(method="tas_theory", points=points, meta={})


def write_curve_csv(path, curves, digits: int = 9) -> None:
    """One CSV for any number of curves: snr_db, op, stderr, method, K_or_tol, seed."""

    def fmt(x) -> str:
        if x is None:
            return ""
        if isinstance(x, (int, np.integer)):
            return str(int(x))
        return f"%.{digits}g" % x

    with open(path, "w", newline="") as fh:
        fh.write("snr_db,op,stderr,method,K_or_tol,seed\n")
        for curve in curves:
            stderrs = curve.meta.get("stderr")
            counts = curve.meta.get("K")
            tol = curve.meta.get("tol")
            seed = curve.meta.get("seed")
            for i, (snr, op) in enumerate(curve.points):
                stderr = stderrs[i] if stderrs is not None else None
                k_or_tol = counts[i] if counts is not None else tol
                row = [
                    fmt(snr),
                    fmt(op),
                    fmt(stderr),
                    curve.method,
                    fmt(k_or_tol),
                    fmt(seed),
                ]
                fh.write(",".join(row) + "\n")
