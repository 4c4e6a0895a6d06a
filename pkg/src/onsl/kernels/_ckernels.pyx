# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled counter-based RNG and Gaussian-mixture score kernels."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, cos, sqrt, exp
from libc.stdint cimport uint64_t

cnp.import_array()

cdef uint64_t _GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t _M1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t _M2 = 0x94D049BB133111EBULL
cdef uint64_t _STREAM_SALT = 0x632BE59BD9B4E019ULL
cdef double _INV_2_53 = 1.0 / 9007199254740992.0
cdef double _TWO_PI = 6.283185307179586


cdef inline uint64_t _mix(uint64_t z) noexcept nogil:
    z = z + _GOLDEN
    z = (z ^ (z >> 30)) * _M1
    z = (z ^ (z >> 27)) * _M2
    return z ^ (z >> 31)


cdef inline double _unit(uint64_t bits) noexcept nogil:
    return (<double>(bits >> 11) + 0.5) * _INV_2_53


def stream_key(seed, stream):
    cdef uint64_t s = <uint64_t>seed
    cdef uint64_t t = <uint64_t>stream
    return _mix(s ^ _mix(t + _STREAM_SALT))


def counter_uniforms(seed, stream, Py_ssize_t start, Py_ssize_t n, Py_ssize_t d):
    cdef uint64_t key = stream_key(seed, stream)
    out = np.empty((n, d), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    cdef uint64_t c
    with nogil:
        for i in range(n):
            for j in range(d):
                c = <uint64_t>((start + i) * d + j)
                o[i, j] = _unit(_mix(_mix(c + key)))
    return out


def counter_normals(seed, stream, Py_ssize_t start, Py_ssize_t n, Py_ssize_t d):
    cdef uint64_t key = stream_key(seed, stream)
    out = np.empty((n, d), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    cdef uint64_t c
    cdef double u1, u2
    with nogil:
        for i in range(n):
            for j in range(d):
                c = <uint64_t>(2 * ((start + i) * d + j))
                u1 = _unit(_mix(_mix(c + key)))
                u2 = _unit(_mix(_mix(c + 1 + key)))
                o[i, j] = sqrt(-2.0 * log(u1)) * cos(_TWO_PI * u2)
    return out


def mixture_score(x, means, precisions, log_norm):
    cdef double[:, ::1] X = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[:, ::1] MU = np.ascontiguousarray(means, dtype=np.float64)
    cdef double[:, :, ::1] P = np.ascontiguousarray(precisions, dtype=np.float64)
    cdef double[::1] LN = np.ascontiguousarray(log_norm, dtype=np.float64)
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], m = MU.shape[0]
    score_arr = np.zeros((n, d), dtype=np.float64)
    resp_arr = np.empty((n, m), dtype=np.float64)
    logd_arr = np.empty(n, dtype=np.float64)
    g_arr = np.empty((m, d), dtype=np.float64)
    diff_arr = np.empty(d, dtype=np.float64)
    cdef double[:, ::1] S = score_arr
    cdef double[:, ::1] R = resp_arr
    cdef double[::1] LD = logd_arr
    cdef double[:, ::1] G = g_arr
    cdef double[::1] D = diff_arr
    cdef Py_ssize_t i, k, a, b
    cdef double acc, quad, top, total
    with nogil:
        for i in range(n):
            top = -1e308
            for k in range(m):
                for a in range(d):
                    D[a] = X[i, a] - MU[k, a]
                quad = 0.0
                for a in range(d):
                    acc = 0.0
                    for b in range(d):
                        acc = acc + P[k, a, b] * D[b]
                    G[k, a] = -acc
                    quad = quad + D[a] * acc
                R[i, k] = LN[k] - 0.5 * quad
                if R[i, k] > top:
                    top = R[i, k]
            total = 0.0
            for k in range(m):
                R[i, k] = exp(R[i, k] - top)
                total = total + R[i, k]
            for k in range(m):
                R[i, k] = R[i, k] / total
                for a in range(d):
                    S[i, a] = S[i, a] + R[i, k] * G[k, a]
            LD[i] = top + log(total)
    return score_arr, resp_arr, logd_arr
