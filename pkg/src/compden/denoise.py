"""Compression-based maximum-likelihood denoising.

The denoiser picks the codeword with the smallest negative log-likelihood
of the observation. Under additive white Gaussian noise this is the
nearest codeword in Euclidean distance, which :func:`nn_denoise` computes
directly through the compiled search kernel.
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels
from .core import Codebook, DimensionError, DomainError, Gaussian, Poisson, Signal, as_vector

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _check_poisson(c: np.ndarray, y: np.ndarray) -> None:
    if np.any(c <= 0):
        raise DomainError("Poisson likelihood needs strictly positive codeword intensities")
    if np.any(y < 0) or np.any(y != np.floor(y)):
        raise DomainError("Poisson observations must be non-negative integers")


def _gaussian_nll(sq: np.ndarray | float, dim: int, sigma: float):
    return dim * (math.log(sigma) + _LOG_SQRT_2PI) + sq / (2.0 * sigma * sigma)


def neg_log_likelihood(c, y, noise) -> float:
    """``-sum_i log p(y_i | c_i)`` including all normalisation constants."""
    vc, vy = as_vector(c), as_vector(y)
    if vc.shape != vy.shape:
        raise DimensionError(f"dimension mismatch: {vc.shape[0]} vs {vy.shape[0]}")
    if isinstance(noise, Gaussian):
        sq = float(kernels.pair_sq_dists(vc[None, :], vy[None, :])[0])
        return float(_gaussian_nll(sq, vc.shape[0], noise.sigma))
    if isinstance(noise, Poisson):
        _check_poisson(vc, vy)
        total = 0.0
        for ci, yi in zip(vc.tolist(), vy.tolist()):
            total += ci - yi * math.log(ci) + math.lgamma(yi + 1.0)
        return total
    raise TypeError(f"unsupported noise model {noise!r}")


def _nll_all(codebook: Codebook, y: np.ndarray, noise) -> np.ndarray:
    c = codebook.codewords
    if isinstance(noise, Gaussian):
        return _gaussian_nll(kernels.sq_dist_rows(c, y), codebook.dim, noise.sigma)
    if isinstance(noise, Poisson):
        _check_poisson(c, y)
        const = sum(math.lgamma(v + 1.0) for v in y.tolist())
        return np.sum(c - y * np.log(c), axis=1) + const
    raise TypeError(f"unsupported noise model {noise!r}")


def ml_denoise(codebook: Codebook, y, noise) -> tuple[int, Signal]:
    """Most likely codeword for observation ``y``; returns ``(1-based index, codeword)``."""
    vy = as_vector(y)
    if vy.shape[0] != codebook.dim:
        raise DimensionError(f"observation dimension {vy.shape[0]} does not match codebook dimension {codebook.dim}")
    nll = _nll_all(codebook, vy, noise)
    m = int(np.argmin(nll)) + 1
    return m, codebook.codeword(m)


def nn_denoise(codebook: Codebook, y) -> tuple[int, Signal]:
    """Projection of ``y`` onto the nearest codeword; ``(1-based index, codeword)``."""
    vy = as_vector(y)
    if vy.shape[0] != codebook.dim:
        raise DimensionError(f"observation dimension {vy.shape[0]} does not match codebook dimension {codebook.dim}")
    m = int(kernels.nearest_indices(codebook.codewords, vy[None, :])[0]) + 1
    return m, codebook.codeword(m)


def nn_denoise_many(codebook: Codebook, observations: np.ndarray) -> np.ndarray:
    """Batch :func:`nn_denoise` returning 0-based indices, for internal hot paths."""
    obs = np.ascontiguousarray(observations, dtype=np.float64)
    if obs.ndim != 2 or obs.shape[1] != codebook.dim:
        raise DimensionError(f"observations must have shape (N, {codebook.dim}), got {obs.shape}")
    return kernels.nearest_indices(codebook.codewords, obs)
