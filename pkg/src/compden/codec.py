"""Codebook construction, encoding/decoding, distortion and serialization."""

from __future__ import annotations

import logging
import os
import struct

import numpy as np

from . import kernels
from .core import (
    Codebook,
    DimensionError,
    DomainError,
    FormatError,
    InsufficientDataError,
    Signal,
    as_vector,
)

log = logging.getLogger(__name__)

MAGIC = b"CDBK"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIII")
_MAX_RATE_BITS = 40


def as_sample_matrix(samples) -> np.ndarray:
    """Stack Signals or array rows into a C-contiguous ``(N, dim)`` float64 array."""
    if isinstance(samples, np.ndarray):
        arr = np.ascontiguousarray(samples, dtype=np.float64)
    else:
        rows = [as_vector(s) for s in samples]
        if not rows:
            return np.empty((0, 0))
        if len({r.shape[0] for r in rows}) != 1:
            raise DimensionError("training samples have differing dimensions")
        arr = np.ascontiguousarray(np.stack(rows), dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"samples must be 2-D (N, dim), got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("samples must be finite")
    return arr


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))


def build_random_codebook(training_samples, rate_bits: int, seed: int) -> Codebook:
    """Draw ``2**rate_bits`` codewords uniformly without replacement from the samples."""
    x = as_sample_matrix(training_samples)
    m_count = 2 ** int(rate_bits)
    if x.shape[0] < m_count:
        raise InsufficientDataError(f"need at least {m_count} samples for rate {rate_bits}, got {x.shape[0]}")
    picks = _rng(seed).permutation(x.shape[0])[:m_count]
    return Codebook(x[picks], rate_bits)


def _assignment_distortion(centroids: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    assign = kernels.nearest_indices(centroids, x)
    return assign, kernels.pair_sq_dists(centroids[assign], x)


def lloyd_codebook(
    training_samples,
    rate_bits: int,
    max_iters: int = 100,
    rel_tol: float = 1e-6,
    seed: int = 0,
) -> tuple[Codebook, list[float]]:
    """Generalized Lloyd (k-means) quantizer started from :func:`build_random_codebook`.

    Each iteration assigns samples to their nearest centroid, reseeds any
    empty cluster with the sample farthest from its centroid, replaces
    centroids by cluster means and records the resulting mean squared
    distortion. Iteration stops once the relative decrease drops below
    ``rel_tol`` or after ``max_iters`` steps. An update that would raise the
    distortion (possible only through rounding) is discarded, so the
    returned history is non-increasing.
    """
    if max_iters < 1:
        raise DomainError("max_iters must be >= 1")
    if not rel_tol > 0:
        raise DomainError("rel_tol must be > 0")
    x = as_sample_matrix(training_samples)
    init = build_random_codebook(x, rate_bits, seed)
    centroids = np.array(init.codewords)
    m_count = centroids.shape[0]

    assign, dists = _assignment_distortion(centroids, x)
    prev = float(np.mean(dists))
    history: list[float] = []
    for it in range(max_iters):
        assign = assign.copy()
        dists = dists.copy()
        counts = np.bincount(assign, minlength=m_count)
        for k in np.flatnonzero(counts == 0):
            movable = counts[assign] > 1
            cand = np.flatnonzero(movable)
            i = int(cand[np.argmax(dists[cand])])
            counts[assign[i]] -= 1
            assign[i] = k
            counts[k] = 1
            dists[i] = 0.0
        sums = np.zeros_like(centroids)
        np.add.at(sums, assign, x)
        new_centroids = sums / counts[:, None]

        new_assign, new_dists = _assignment_distortion(new_centroids, x)
        cur = float(np.mean(new_dists))
        if cur > prev:
            log.debug("lloyd: iteration %d would raise distortion %.17g -> %.17g; stopping", it, prev, cur)
            break
        centroids, assign, dists = new_centroids, new_assign, new_dists
        history.append(cur)
        if prev == 0.0 or (prev - cur) / prev < rel_tol:
            break
        prev = cur
    return Codebook(centroids, rate_bits), history


def _check_dim(codebook: Codebook, v: np.ndarray) -> None:
    if v.shape[-1] != codebook.dim:
        raise DimensionError(f"signal dimension {v.shape[-1]} does not match codebook dimension {codebook.dim}")


def encode(codebook: Codebook, x) -> int:
    """1-based index of the codeword nearest to ``x`` (smallest index on ties)."""
    v = as_vector(x)
    _check_dim(codebook, v)
    return int(kernels.nearest_indices(codebook.codewords, v[None, :])[0]) + 1


def encode_many(codebook: Codebook, samples) -> np.ndarray:
    """Vectorised :func:`encode`; returns 1-based indices."""
    x = as_sample_matrix(samples)
    _check_dim(codebook, x)
    return kernels.nearest_indices(codebook.codewords, x) + 1


def decode(codebook: Codebook, m: int) -> Signal:
    return codebook.codeword(m)


def codebook_distortion(codebook: Codebook, samples) -> float:
    """Mean squared error of ``decode(encode(x))`` over the samples."""
    x = as_sample_matrix(samples)
    if x.shape[0] == 0:
        raise DomainError("samples must be non-empty")
    _check_dim(codebook, x)
    c = codebook.codewords
    idx = kernels.nearest_indices(c, x)
    return float(np.mean(kernels.pair_sq_dists(c[idx], x)))


def codebook_to_bytes(codebook: Codebook) -> bytes:
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, codebook.dim, codebook.rate_bits)
    return header + codebook.codewords.astype("<f8").tobytes(order="C")


def codebook_from_bytes(blob: bytes) -> Codebook:
    if len(blob) < _HEADER.size:
        raise FormatError("codebook file shorter than its header")
    magic, version, dim, rate_bits = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}")
    if dim < 1 or rate_bits < 1 or rate_bits > _MAX_RATE_BITS:
        raise FormatError(f"invalid header: dim={dim}, rate_bits={rate_bits}")
    m_count = 2**rate_bits
    expected = m_count * dim * 8
    payload = blob[_HEADER.size:]
    if len(payload) != expected:
        raise FormatError(
            f"payload holds {len(payload)} bytes; rate {rate_bits} and dim {dim} require {expected}"
        )
    values = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(m_count, dim)
    try:
        return Codebook(values, rate_bits)
    except (DomainError, DimensionError) as exc:
        raise FormatError(str(exc)) from exc


def save_codebook(codebook: Codebook, path: str | os.PathLike) -> None:
    with open(path, "wb") as fh:
        fh.write(codebook_to_bytes(codebook))


def load_codebook(path: str | os.PathLike) -> Codebook:
    with open(path, "rb") as fh:
        return codebook_from_bytes(fh.read())
