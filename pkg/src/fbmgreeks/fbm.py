"""Exact-law sampling of fractional Brownian motion on dyadic grids.

Two samplers produce the same law: a circulant-embedding sampler (fast,
any grid size) and a dense Cholesky sampler used as an oracle for small
grids. Both are pure functions of (grid, H, seed).
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import lapack

from .errors import ConfigurationError, DomainError, EmbeddingError, NumericalError
from .grids import DyadicGrid, HurstParameter, SeedRecord

CHOLESKY_MAX_STEPS = 1 << 12
EIG_CLAMP_REL_TOL = 1e-10


def fbm_covariance(s, t, h: HurstParameter):
    """cov(B_s, B_t) = (s^2H + t^2H - |t-s|^2H) / 2 for s, t >= 0."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0.0) or np.any(t < 0.0):
        raise DomainError("covariance requires non-negative times")
    e = 2.0 * h.value
    out = 0.5 * (s**e + t**e - np.abs(t - s) ** e)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FbmPath:
    """Sampled path values at the grid nodes, values[0] = 0."""

    grid: DyadicGrid
    hurst: HurstParameter
    values: np.ndarray
    seed: Optional[SeedRecord] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n1 + 1,):
            raise ConfigurationError(
                f"path needs {self.grid.n1 + 1} node values, got shape {v.shape}"
            )
        if v[0] != 0.0:
            raise ConfigurationError("fBm paths start at 0")
        object.__setattr__(self, "values", v)

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)


@lru_cache(maxsize=32)
def _circulant_sqrt_eigs(n1: int, h_value: float) -> np.ndarray:
    """sqrt of the eigenvalues of the 2*n1 circulant embedding of unit-lag fGn.

    Negative eigenvalues are impossible for fGn up to roundoff; tiny negative
    mass is clamped to zero, anything larger is a hard error because clamping
    it would corrupt the law.
    """
    k = np.arange(n1 + 1, dtype=np.float64)
    gamma = 0.5 * ((k + 1.0) ** (2 * h_value) - 2.0 * k ** (2 * h_value) + np.abs(k - 1.0) ** (2 * h_value))
    first_row = np.concatenate([gamma, gamma[n1 - 1:0:-1]])
    lam = np.fft.fft(first_row).real
    if lam.min() < -EIG_CLAMP_REL_TOL * lam.max():
        raise EmbeddingError(
            f"circulant embedding failed for H={h_value}: most negative eigenvalue {lam.min():.3e}"
        )
    out = np.sqrt(np.maximum(lam, 0.0))
    out.setflags(write=False)
    return out


def _fgn_unit_lag(n1: int, h: HurstParameter, gen: np.random.Generator) -> np.ndarray:
    """One row of unit-lag fractional Gaussian noise via circulant embedding.

    Consumes exactly 2*n1 normals: z[0] and z[1] drive the two real Fourier
    modes, the remaining pairs (z[2j], z[2j+1]) the complex ones.
    """
    m = 2 * n1
    sqrt_lam = _circulant_sqrt_eigs(n1, h.value)
    z = gen.standard_normal(m)
    a = np.empty(m, dtype=np.complex128)
    a[0] = sqrt_lam[0] * z[0]
    a[n1] = sqrt_lam[n1] * z[1]
    half = sqrt_lam[1:n1] / np.sqrt(2.0)
    a[1:n1] = half * (z[2::2] + 1j * z[3::2])
    a[n1 + 1:] = np.conj(a[1:n1][::-1])
    return np.fft.fft(a).real[:n1] / np.sqrt(m)


def circulant_increment_batch(grid: DyadicGrid, h: HurstParameter, seed: SeedRecord, n: int) -> np.ndarray:
    """fBm increments for substreams seed.stream .. seed.stream+n-1, one per row.

    Unit-lag noise is rescaled by step**H (self-similarity), so one spectral
    factorization serves every horizon and is cached across calls.
    """
    scale = grid.step**h.value
    out = np.empty((n, grid.n1))
    for i in range(n):
        out[i] = _fgn_unit_lag(grid.n1, h, seed.substream(i).generator())
    out *= scale
    return out


def _paths_from_increments(grid, h, incs, seed):
    values = np.concatenate([np.zeros((incs.shape[0], 1)), np.cumsum(incs, axis=1)], axis=1)
    return values


def sample_fbm_circulant(grid: DyadicGrid, h: HurstParameter, seed: SeedRecord) -> FbmPath:
    """Sample one fBm path by circulant embedding of its increment process.

    Deterministic in (grid, h, seed); safe to call concurrently.
    """
    incs = circulant_increment_batch(grid, h, seed, 1)
    return FbmPath(grid, h, _paths_from_increments(grid, h, incs, seed)[0], seed)


def cholesky_lower(matrix: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor; failure reports the offending pivot index."""
    factor, info = lapack.dpotrf(np.asarray(matrix, dtype=float), lower=1)
    if info != 0:
        raise NumericalError(
            f"matrix is not numerically positive definite (pivot {info})", pivot=int(info)
        )
    return np.tril(factor)


@lru_cache(maxsize=8)
def _cholesky_factor(n1: int, h_value: float, horizon: float) -> np.ndarray:
    nodes = horizon * np.arange(1, n1 + 1) / n1
    e = 2.0 * h_value
    cov = 0.5 * (
        nodes[:, None] ** e + nodes[None, :] ** e - np.abs(nodes[:, None] - nodes[None, :]) ** e
    )
    out = cholesky_lower(cov)
    out.setflags(write=False)
    return out


def cholesky_path_batch(grid: DyadicGrid, h: HurstParameter, seed: SeedRecord, n: int) -> np.ndarray:
    """Node values (rows) for n Cholesky-sampled paths on consecutive substreams."""
    if grid.n1 > CHOLESKY_MAX_STEPS:
        raise ConfigurationError(
            f"Cholesky sampler is limited to {CHOLESKY_MAX_STEPS} steps, got {grid.n1}"
        )
    factor = _cholesky_factor(grid.n1, h.value, grid.horizon)
    z = np.empty((n, grid.n1))
    for i in range(n):
        z[i] = seed.substream(i).generator().standard_normal(grid.n1)
    values = np.zeros((n, grid.n1 + 1))
    values[:, 1:] = z @ factor.T
    return values


def sample_fbm_cholesky(grid: DyadicGrid, h: HurstParameter, seed: SeedRecord) -> FbmPath:
    """Exact-law oracle sampler: dense Cholesky of the node covariance."""
    values = cholesky_path_batch(grid, h, seed, 1)
    return FbmPath(grid, h, values[0], seed)


def sample_fbm_pair(
    grid: DyadicGrid, h1: HurstParameter, h2: HurstParameter, seed: SeedRecord
) -> tuple[FbmPath, FbmPath]:
    """Two independent fBm paths built from disjoint substreams 2k and 2k+1."""
    first = sample_fbm_circulant(grid, h1, SeedRecord(seed.master, 2 * seed.stream))
    second = sample_fbm_circulant(grid, h2, SeedRecord(seed.master, 2 * seed.stream + 1))
    return first, second


def write_path_csv(path: FbmPath, target) -> None:
    """Dump a path as CSV with header ``k,t,value``."""
    nodes = path.grid.nodes
    buf = target if hasattr(target, "write") else io.StringIO()
    buf.write("k,t,value\n")
    for k, (t, v) in enumerate(zip(nodes, path.values)):
        buf.write(f"{k},{float(t)!r},{float(v)!r}\n")
    if buf is not target:
        with open(target, "w") as fh:
            fh.write(buf.getvalue())
