"""Correlated Nakagami-m envelope ensembles.

Two samplers are provided. The physical construction draws, for integer
shape m, m independent complex Gaussian port vectors, colors them with the
square-root factor of the coefficient-level correlation matrix
(eigenvectors times sqrt of eigenvalues, negatives floored at zero), and
takes the root-sum-square magnitude per port; marginals are exactly
Nakagami(m, mu) and the envelope correlation converges to the hypergeometric
map of the squared coefficient correlation. The copula sampler colors a
standard normal vector with the Cholesky factor of any (repaired) covariance
and pushes each component through the normal CDF and the Nakagami quantile.

No envelope-level mixing operation is offered: summing or linearly mixing
Nakagami envelope draws does not preserve the marginal law (the family is
not closed under addition), and correlating gamma gains then taking square
roots distorts the shape parameter, so correlation is injected at the
complex-coefficient or copula level only.

Sampling is chunked (fixed chunk size, one counter-based RNG substream per
chunk), which makes ensembles bit-identical for any thread count.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .correlation import CorrelationMatrix, FasGeometry, jakes_matrix
from .nakagami import NakagamiParams, quantile
from .numerics import psd_repair, sym_eigen

__all__ = [
    "CHUNK_SIZE",
    "GeneratorConfig",
    "ChannelEnsemble",
    "derive_seed",
    "generate_physical",
    "generate_copula",
    "physical_envelope_chunks",
    "copula_envelope_chunks",
    "write_ensemble_csv",
    "read_ensemble_csv",
]

CHUNK_SIZE = 1 << 17

CDF_CLAMP = 1e-16


@dataclass(frozen=True)
class GeneratorConfig:
    geom: FasGeometry
    params: NakagamiParams
    seed: int
    n_samples: int

    def __post_init__(self):
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")


@dataclass(frozen=True)
class ChannelEnsemble:
    envelopes: np.ndarray = field(repr=False)
    provenance: dict

    @property
    def n_samples(self) -> int:
        return self.envelopes.shape[0]

    @property
    def n_ports(self) -> int:
        return self.envelopes.shape[1]


def derive_seed(root_seed: int, *path: int) -> int:
    """Stable 64-bit child seed for a work item (e.g. one sweep point)."""
    ss = np.random.SeedSequence([int(root_seed), *[int(p) for p in path]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(chunk_index,))
    return np.random.Generator(np.random.Philox(ss))


def _chunk_plan(total: int):
    return [
        (idx, start, min(CHUNK_SIZE, total - start))
        for idx, start in enumerate(range(0, total, CHUNK_SIZE))
    ]


def _cov_id(tag: str, entries: np.ndarray) -> str:
    digest = hashlib.sha256(np.ascontiguousarray(entries).tobytes()).hexdigest()[:8]
    return f"{tag}-{digest}"


def _integer_m(params: NakagamiParams) -> int:
    m_int = int(round(params.m))
    if abs(params.m - m_int) > 1e-12 or m_int < 1:
        raise ValueError("the physical generator requires integer m >= 1")
    return m_int


def _physical_mixing(geom: FasGeometry) -> np.ndarray:
    eig = sym_eigen(jakes_matrix(geom).entries)
    return eig.eigenvectors * np.sqrt(np.maximum(eig.eigenvalues, 0.0))


def _physical_chunk_worker(cfg: GeneratorConfig):
    m_int = _integer_m(cfg.params)
    mixing = _physical_mixing(cfg.geom)
    scale = np.sqrt(cfg.params.mu / (2.0 * m_int))
    plan = _chunk_plan(cfg.n_samples)

    def make_chunk(idx: int):
        _, start, count = plan[idx]
        rng = _chunk_rng(cfg.seed, idx)
        z = rng.standard_normal((count, m_int, cfg.geom.n_ports, 2))
        coeff = (z[..., 0] + 1j * z[..., 1]) * scale
        colored = coeff @ mixing.T
        return start, np.sqrt(np.sum(np.abs(colored) ** 2, axis=1))

    return make_chunk, len(plan)


def _copula_chunk_worker(
    geom: FasGeometry,
    params: NakagamiParams,
    cov: CorrelationMatrix,
    seed: int,
    n_samples: int,
):
    if cov.n_ports != geom.n_ports:
        raise ValueError("covariance size does not match the geometry")
    repaired = psd_repair(cov.entries)
    try:
        chol = np.linalg.cholesky(repaired)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance is not positive definite after repair") from exc
    plan = _chunk_plan(n_samples)

    def make_chunk(idx: int):
        _, start, count = plan[idx]
        rng = _chunk_rng(seed, idx)
        normals = rng.standard_normal((count, geom.n_ports)) @ chol.T
        uniforms = np.clip(ndtr(normals), CDF_CLAMP, 1.0 - CDF_CLAMP)
        return start, quantile(params, uniforms)

    return make_chunk, len(plan)


def physical_envelope_chunks(cfg: GeneratorConfig):
    """Yield (start_row, envelope_chunk) pairs for the physical construction.

    Streaming interface for Monte Carlo consumers that only reduce over
    samples and must not hold the full ensemble in memory.
    """
    make_chunk, n_chunks = _physical_chunk_worker(cfg)
    for idx in range(n_chunks):
        yield make_chunk(idx)


def copula_envelope_chunks(
    geom: FasGeometry,
    params: NakagamiParams,
    cov: CorrelationMatrix,
    seed: int,
    n_samples: int,
):
    """Yield (start_row, envelope_chunk) pairs for the Gaussian-copula sampler."""
    make_chunk, n_chunks = _copula_chunk_worker(geom, params, cov, seed, n_samples)
    for idx in range(n_chunks):
        yield make_chunk(idx)


def _assemble(make_chunk, n_chunks: int, n_samples: int, n_ports: int, threads: int) -> np.ndarray:
    out = np.empty((n_samples, n_ports))

    def fill(idx: int) -> None:
        start, chunk = make_chunk(idx)
        out[start : start + chunk.shape[0]] = chunk

    if threads <= 1:
        for idx in range(n_chunks):
            fill(idx)
    else:
        # Chunks own disjoint row ranges and independent RNG substreams, so
        # any scheduling order produces the same array.
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, range(n_chunks)))
    return out


def generate_physical(cfg: GeneratorConfig, threads: int = 1) -> ChannelEnsemble:
    """Sample the physical construction; marginals are exact Nakagami(m, mu)."""
    make_chunk, n_chunks = _physical_chunk_worker(cfg)
    envelopes = _assemble(make_chunk, n_chunks, cfg.n_samples, cfg.geom.n_ports, threads)
    provenance = {
        "generator": "physical",
        "covariance": _cov_id("coefficient", jakes_matrix(cfg.geom).entries),
        "seed": int(cfg.seed),
        "n_samples": int(cfg.n_samples),
        "n_ports": cfg.geom.n_ports,
        "aperture": cfg.geom.aperture,
        "m": cfg.params.m,
        "mu": cfg.params.mu,
    }
    return ChannelEnsemble(envelopes=envelopes, provenance=provenance)


def generate_copula(
    geom: FasGeometry,
    params: NakagamiParams,
    cov: CorrelationMatrix,
    seed: int,
    n_samples: int,
    threads: int = 1,
) -> ChannelEnsemble:
    """Sample the Gaussian copula with the given covariance and Nakagami marginals."""
    make_chunk, n_chunks = _copula_chunk_worker(geom, params, cov, seed, n_samples)
    envelopes = _assemble(make_chunk, n_chunks, n_samples, geom.n_ports, threads)
    provenance = {
        "generator": "copula",
        "covariance": _cov_id(cov.level, cov.entries),
        "covariance_level": cov.level,
        "seed": int(seed),
        "n_samples": int(n_samples),
        "n_ports": geom.n_ports,
        "aperture": geom.aperture,
        "m": params.m,
        "mu": params.mu,
    }
    return ChannelEnsemble(envelopes=envelopes, provenance=provenance)


def write_ensemble_csv(ensemble: ChannelEnsemble, path, digits: int = 9) -> None:
    """CSV export: one `#` provenance line, a port header, K sample rows."""
    n = ensemble.n_ports
    with open(path, "w", newline="") as fh:
        fh.write("# " + json.dumps(ensemble.provenance, sort_keys=True) + "\n")
        fh.write(",".join(f"port_{j + 1}" for j in range(n)) + "\n")
        np.savetxt(fh, ensemble.envelopes, fmt=f"%.{digits}g", delimiter=",")


def read_ensemble_csv(path) -> ChannelEnsemble:
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise ValueError("missing provenance comment line")
        provenance = json.loads(first[1:].strip())
        header = fh.readline()
        if not header.startswith("port_1"):
            raise ValueError("missing port header line")
        envelopes = np.loadtxt(fh, delimiter=",", ndmin=2)
    return ChannelEnsemble(envelopes=envelopes, provenance=provenance)
