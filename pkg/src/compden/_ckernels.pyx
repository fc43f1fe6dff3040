# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for codebook search and pairwise-error sums.

Every reduction runs left to right over the coordinate axis so the results
match ``_pykernels`` bit for bit. Build with ``-ffp-contract=off``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, erfc

cnp.import_array()

cdef double SQRT2 = 1.4142135623730951


def sq_dist_rows(const double[:, ::1] codewords, const double[::1] y):
    cdef Py_ssize_t m_count = codewords.shape[0]
    cdef Py_ssize_t dim = codewords.shape[1]
    cdef Py_ssize_t m, j
    cdef double acc, diff
    out = np.empty(m_count, dtype=np.float64)
    cdef double[::1] res = out
    with nogil:
        for m in range(m_count):
            acc = 0.0
            for j in range(dim):
                diff = codewords[m, j] - y[j]
                acc = acc + diff * diff
            res[m] = acc
    return out


def pair_sq_dists(const double[:, ::1] a, const double[:, ::1] b):
    cdef Py_ssize_t n_rows = a.shape[0]
    cdef Py_ssize_t dim = a.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc, diff
    out = np.empty(n_rows, dtype=np.float64)
    cdef double[::1] res = out
    with nogil:
        for i in range(n_rows):
            acc = 0.0
            for j in range(dim):
                diff = a[i, j] - b[i, j]
                acc = acc + diff * diff
            res[i] = acc
    return out


def dot(const double[::1] a, const double[::1] b):
    cdef Py_ssize_t j
    cdef double acc = 0.0
    for j in range(a.shape[0]):
        acc = acc + a[j] * b[j]
    return acc


def nearest_indices(const double[:, ::1] codewords, const double[:, ::1] queries):
    cdef Py_ssize_t m_count = codewords.shape[0]
    cdef Py_ssize_t dim = codewords.shape[1]
    cdef Py_ssize_t n_q = queries.shape[0]
    cdef Py_ssize_t q, m, j, best
    cdef double acc, diff, best_d
    out = np.empty(n_q, dtype=np.int64)
    cdef cnp.int64_t[::1] res = out
    with nogil:
        for q in range(n_q):
            best = 0
            best_d = 0.0
            for m in range(m_count):
                acc = 0.0
                for j in range(dim):
                    diff = codewords[m, j] - queries[q, j]
                    acc = acc + diff * diff
                # strict comparison keeps the smallest index on ties
                if m == 0 or acc < best_d:
                    best_d = acc
                    best = m
            res[q] = best
    return out


def union_q_sum(const double[:, ::1] codewords, const double[::1] d,
                double offset, double sigma):
    cdef Py_ssize_t m_count = codewords.shape[0]
    cdef Py_ssize_t dim = codewords.shape[1]
    cdef Py_ssize_t m, v, j
    cdef double acc, ip, diff, dist, arg
    cdef double total = 0.0
    with nogil:
        for m in range(m_count):
            for v in range(m_count):
                if v == m:
                    continue
                acc = 0.0
                ip = 0.0
                for j in range(dim):
                    diff = codewords[v, j] - codewords[m, j]
                    acc = acc + diff * diff
                    ip = ip + d[j] * diff
                dist = sqrt(acc)
                arg = (dist / 2.0 + ip / dist + offset) / sigma
                total = total + 0.5 * erfc(arg / SQRT2)
    return total
