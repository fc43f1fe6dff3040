"""NumPy fallback for the compiled kernels in ``_ckernels.pyx``.

Sums are accumulated one coordinate at a time (column loop) so each row is
reduced strictly left to right, reproducing the compiled results exactly.
NumPy's own ``sum`` uses pairwise summation and would not.
"""

from __future__ import annotations

import math

import numpy as np

_SQRT2 = 1.4142135623730951
_CHUNK_ELEMS = 1 << 22


def sq_dist_rows(codewords: np.ndarray, y: np.ndarray) -> np.ndarray:
    acc = np.zeros(codewords.shape[0])
    for j in range(codewords.shape[1]):
        diff = codewords[:, j] - y[j]
        acc += diff * diff
    return acc


def pair_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    acc = np.zeros(a.shape[0])
    for j in range(a.shape[1]):
        diff = a[:, j] - b[:, j]
        acc += diff * diff
    return acc


def dot(a: np.ndarray, b: np.ndarray) -> float:
    acc = 0.0
    for ai, bi in zip(a.tolist(), b.tolist()):
        acc = acc + ai * bi
    return acc


def nearest_indices(codewords: np.ndarray, queries: np.ndarray) -> np.ndarray:
    m_count, dim = codewords.shape
    out = np.empty(queries.shape[0], dtype=np.int64)
    step = max(1, _CHUNK_ELEMS // max(1, m_count))
    for start in range(0, queries.shape[0], step):
        block = queries[start:start + step]
        acc = np.zeros((block.shape[0], m_count))
        for j in range(dim):
            diff = codewords[None, :, j] - block[:, j, None]
            acc += diff * diff
        # argmin returns the first minimum, i.e. the smallest index on ties
        out[start:start + step] = np.argmin(acc, axis=1)
    return out


def union_q_sum(codewords: np.ndarray, d: np.ndarray, offset: float, sigma: float) -> float:
    m_count, dim = codewords.shape
    total = 0.0
    for m in range(m_count):
        diff_all = codewords - codewords[m]
        acc = np.zeros(m_count)
        ip = np.zeros(m_count)
        for j in range(dim):
            col = diff_all[:, j]
            acc += col * col
            ip += d[j] * col
        dist = np.sqrt(acc)
        with np.errstate(divide="ignore", invalid="ignore"):
            arg = (dist / 2.0 + ip / dist + offset) / sigma
        for v, a in enumerate(arg.tolist()):
            if v == m:
                continue
            total = total + 0.5 * math.erfc(a / _SQRT2)
    return total
