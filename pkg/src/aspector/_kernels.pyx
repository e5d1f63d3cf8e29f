# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for sparse TF-IDF similarity and retrieval scoring.

Arithmetic order mirrors ``_pykernels`` exactly; do not enable fast-math.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline double _dot(const int[::1] idx, const double[::1] val,
                        Py_ssize_t a0, Py_ssize_t a1,
                        Py_ssize_t b0, Py_ssize_t b1) noexcept nogil:
    cdef double acc = 0.0
    cdef int x, y
    while a0 < a1 and b0 < b1:
        x = idx[a0]
        y = idx[b0]
        if x == y:
            acc += val[a0] * val[b0]
            a0 += 1
            b0 += 1
        elif x < y:
            a0 += 1
        else:
            b0 += 1
    return acc


def sparse_dot(a_idx, a_val, b_idx, b_val):
    cdef const int[::1] ai = np.ascontiguousarray(a_idx, dtype=np.int32)
    cdef const double[::1] av = np.ascontiguousarray(a_val, dtype=np.float64)
    cdef const int[::1] bi = np.ascontiguousarray(b_idx, dtype=np.int32)
    cdef const double[::1] bv = np.ascontiguousarray(b_val, dtype=np.float64)
    cdef Py_ssize_t i = 0, j = 0
    cdef Py_ssize_t na = ai.shape[0], nb = bi.shape[0]
    cdef double acc = 0.0
    with nogil:
        while i < na and j < nb:
            if ai[i] == bi[j]:
                acc += av[i] * bv[j]
                i += 1
                j += 1
            elif ai[i] < bi[j]:
                i += 1
            else:
                j += 1
    return acc


def row_gram(rows, indptr, indices, data):
    cdef const long long[::1] r = np.ascontiguousarray(rows, dtype=np.int64)
    cdef const long long[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const int[::1] idx = np.ascontiguousarray(indices, dtype=np.int32)
    cdef const double[::1] val = np.ascontiguousarray(data, dtype=np.float64)
    cdef Py_ssize_t n = r.shape[0]
    out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t a, b
    cdef double v
    with nogil:
        for a in range(n):
            for b in range(a, n):
                v = _dot(idx, val, ptr[r[a]], ptr[r[a] + 1], ptr[r[b]], ptr[r[b] + 1])
                o[a, b] = v
                o[b, a] = v
    return out


cdef inline double _max_match(const double[:, ::1] g, const long long[::1] mem,
                              Py_ssize_t a0, Py_ssize_t a1,
                              Py_ssize_t b0, Py_ssize_t b1) noexcept nogil:
    cdef Py_ssize_t na = a1 - a0, nb = b1 - b0
    cdef Py_ssize_t i, j
    cdef double best, v, row_sum = 0.0, col_sum = 0.0
    if na == 0 or nb == 0:
        return 0.0
    for i in range(a0, a1):
        best = 0.0
        for j in range(b0, b1):
            v = g[mem[i], mem[j]]
            if v > best:
                best = v
        row_sum += best
    for j in range(b0, b1):
        best = 0.0
        for i in range(a0, a1):
            v = g[mem[i], mem[j]]
            if v > best:
                best = v
        col_sum += best
    return row_sum / (2.0 * na) + col_sum / (2.0 * nb)


def set_similarity_matrix(gram, set_indptr, set_members):
    cdef const double[:, ::1] g = np.ascontiguousarray(gram, dtype=np.float64)
    cdef const long long[::1] ptr = np.ascontiguousarray(set_indptr, dtype=np.int64)
    cdef const long long[::1] mem = np.ascontiguousarray(set_members, dtype=np.int64)
    cdef Py_ssize_t n = ptr.shape[0] - 1
    out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t s, t
    cdef double v
    with nogil:
        for s in range(n):
            for t in range(s, n):
                v = _max_match(g, mem, ptr[s], ptr[s + 1], ptr[t], ptr[t + 1])
                o[s, t] = v
                o[t, s] = v
    return out


def accumulate_scores(q_terms, q_weights, post_indptr, post_docs, post_weights, Py_ssize_t n_docs):
    cdef const int[::1] qt = np.ascontiguousarray(q_terms, dtype=np.int32)
    cdef const double[::1] qw = np.ascontiguousarray(q_weights, dtype=np.float64)
    cdef const long long[::1] ptr = np.ascontiguousarray(post_indptr, dtype=np.int64)
    cdef const int[::1] docs = np.ascontiguousarray(post_docs, dtype=np.int32)
    cdef const double[::1] pw = np.ascontiguousarray(post_weights, dtype=np.float64)
    scores = np.zeros(n_docs, dtype=np.float64)
    cdef double[::1] s = scores
    cdef Py_ssize_t k, p, t
    cdef double w
    with nogil:
        for k in range(qt.shape[0]):
            t = qt[k]
            w = qw[k]
            for p in range(ptr[t], ptr[t + 1]):
                s[docs[p]] += w * pw[p]
    return scores
