# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Must stay call-compatible with ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport lgamma, exp, log

cnp.import_array()


def accumulate(const cnp.int64_t[:] l, const cnp.int64_t[:] m, c=None):
    """Sums and cross-sums of the per-record statistics over all records."""
    cdef Py_ssize_t n = l.shape[0]
    cdef bint has_c = c is not None
    cdef int d = 8 if has_c else 6
    cdef const cnp.int64_t[:] cv
    if has_c:
        cv = c
    else:
        cv = l
    sums_arr = np.zeros(d, dtype=np.float64)
    cross_arr = np.zeros((d, d), dtype=np.float64)
    cdef double[:] sums = sums_arr
    cdef double[:, :] cross = cross_arr
    cdef double u[8]
    cdef double a, b, x
    cdef Py_ssize_t i, p, q
    for i in range(n):
        a = <double>l[i]
        b = <double>m[i]
        u[0] = a
        u[1] = b
        u[2] = a * a
        u[3] = b * b
        u[4] = a * b
        u[5] = (a - b) * (a - b)
        if has_c:
            x = <double>cv[i]
            u[6] = x
            u[7] = x * x
        for p in range(d):
            sums[p] += u[p]
            for q in range(p, d):
                cross[p, q] += u[p] * u[q]
    for p in range(d):
        for q in range(p):
            cross[p, q] = cross[q, p]
    return sums_arr, cross_arr


cdef void _binom_row(Py_ssize_t k, double eta, double* out) noexcept nogil:
    cdef Py_ssize_t j
    cdef double lk, le, lq
    if eta <= 0.0:
        for j in range(k + 1):
            out[j] = 0.0
        out[0] = 1.0
        return
    if eta >= 1.0:
        for j in range(k + 1):
            out[j] = 0.0
        out[k] = 1.0
        return
    lk = lgamma(k + 1.0)
    le = log(eta)
    lq = log(1.0 - eta)
    for j in range(k + 1):
        out[j] = exp(lk - lgamma(j + 1.0) - lgamma(k - j + 1.0) + j * le + (k - j) * lq)


def triple_sum(const double[:] g, double eta1, double eta2, int order):
    """E[l^a m^b] for a, b <= order by enumerating every (k, l, m) term."""
    cdef Py_ssize_t kmax = g.shape[0] - 1
    cdef int o = order + 1
    out_arr = np.zeros((o, o), dtype=np.float64)
    cdef double[:, :] out = out_arr
    b1_arr = np.empty(kmax + 1, dtype=np.float64)
    b2_arr = np.empty(kmax + 1, dtype=np.float64)
    cdef double[:] b1 = b1_arr
    cdef double[:] b2 = b2_arr
    cdef double pl[16]
    cdef double pm[16]
    cdef double w, wl
    cdef Py_ssize_t k, i, j
    cdef int a, b
    if o > 16:
        raise ValueError("order too large")
    for k in range(kmax + 1):
        if g[k] == 0.0:
            continue
        _binom_row(k, eta1, &b1[0])
        _binom_row(k, eta2, &b2[0])
        for i in range(k + 1):
            wl = g[k] * b1[i]
            if wl == 0.0:
                continue
            pl[0] = 1.0
            for a in range(1, o):
                pl[a] = pl[a - 1] * i
            # pm[b] accumulates sum_j w_ij j^b for this (k, i)
            for b in range(o):
                pm[b] = 0.0
            for j in range(k + 1):
                w = wl * b2[j]
                if w == 0.0:
                    continue
                for b in range(o):
                    pm[b] += w
                    w *= j
            for a in range(o):
                for b in range(o):
                    out[a, b] += pl[a] * pm[b]
    return out_arr


def coincidence_sum(const double[:] g, double eta1, double eta2, int order):
    """E[c^p] for p <= order, c the second thinning (by eta2) of arm-1 counts."""
    cdef Py_ssize_t kmax = g.shape[0] - 1
    cdef int o = order + 1
    out_arr = np.zeros(o, dtype=np.float64)
    h_arr = np.zeros((kmax + 1, o), dtype=np.float64)
    row_arr = np.empty(kmax + 1, dtype=np.float64)
    cdef double[:] out = out_arr
    cdef double[:, :] h = h_arr
    cdef double[:] row = row_arr
    cdef Py_ssize_t k, l, c
    cdef int p
    cdef double cp, w
    # h[l, p] = sum_c B_{l,eta2}(c) c^p
    for l in range(kmax + 1):
        _binom_row(l, eta2, &row[0])
        for c in range(l + 1):
            cp = row[c]
            for p in range(o):
                h[l, p] += cp
                cp *= c
    for k in range(kmax + 1):
        if g[k] == 0.0:
            continue
        _binom_row(k, eta1, &row[0])
        for l in range(k + 1):
            w = g[k] * row[l]
            for p in range(o):
                out[p] += w * h[l, p]
    return out_arr
