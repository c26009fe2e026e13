# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the kernels in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log1p, fabs, isnan, NAN

cnp.import_array()

cdef double SERIES_CUTOFF = 3.0
cdef int CF_DEPTH = 80
cdef double INV_SQRT_2PI = 0.3989422804014327


cdef inline double _norm_cdf(double x) nogil:
    cdef double ax, pdf, x2, term, total, t, tail
    cdef int k
    if isnan(x):
        return NAN
    ax = fabs(x)
    pdf = exp(-0.5 * x * x) * INV_SQRT_2PI
    if ax <= SERIES_CUTOFF:
        x2 = x * x
        term = x
        total = x
        k = 1
        while k < 200:
            term = term * x2 / (2 * k + 1)
            total = total + term
            if fabs(term) <= 1e-17 * fabs(total):
                break
            k += 1
        return 0.5 + pdf * total
    t = 0.0
    for k in range(CF_DEPTH, 0, -1):
        t = k / (ax + t)
    tail = pdf / (ax + t)
    if x < 0:
        return tail
    return 1.0 - tail


def norm_cdf(x):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] flat = np.ascontiguousarray(
        x, dtype=np.float64).ravel()
    cdef Py_ssize_t n = flat.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef const double[::1] xv = flat
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            ov[i] = _norm_cdf(xv[i])
    return out.reshape(np.shape(x))


def jeffreys_bernoulli(p, q, double floor):
    pb, qb = np.broadcast_arrays(np.asarray(p, dtype=np.float64), np.asarray(q, dtype=np.float64))
    shape = pb.shape
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pa = np.ascontiguousarray(pb).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] qa = np.ascontiguousarray(qb).ravel()
    cdef Py_ssize_t n = pa.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] j = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] kf = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] kb = np.empty(n, dtype=np.float64)
    cdef const double[::1] pv = pa
    cdef const double[::1] qv = qa
    cdef double[::1] jv = j
    cdef double[::1] fv = kf
    cdef double[::1] bv = kb
    cdef double hi = 1.0 - floor
    cdef double pi, qi, lr, lc, a, b, d
    cdef Py_ssize_t i
    cdef long clamped = 0
    with nogil:
        for i in range(n):
            pi = pv[i]
            qi = qv[i]
            if pi < floor:
                pi = floor
                clamped += 1
            elif pi > hi:
                pi = hi
                clamped += 1
            if qi < floor:
                qi = floor
                clamped += 1
            elif qi > hi:
                qi = hi
                clamped += 1
            # log1p of the relative difference when the ratio is near 1
            d = pi - qi
            if fabs(d) <= 0.5 * qi:
                lr = log1p(d / qi)
            else:
                lr = log(pi) - log(qi)
            if fabs(d) <= 0.5 * (1.0 - qi):
                lc = log1p(-d / (1.0 - qi))
            else:
                lc = log1p(-pi) - log1p(-qi)
            a = pi * lr + (1.0 - pi) * lc
            b = -(qi * lr + (1.0 - qi) * lc)
            if a < 0.0:
                a = 0.0
            if b < 0.0:
                b = 0.0
            fv[i] = a
            bv[i] = b
            jv[i] = d * (lr - lc)
    return j.reshape(shape), kf.reshape(shape), kb.reshape(shape), int(clamped)


def gram_noise(base, vectors, double eps, signs):
    cdef const double[:, ::1] bv = np.ascontiguousarray(base, dtype=np.float64)
    cdef const double[:, ::1] uv = np.ascontiguousarray(vectors, dtype=np.float64)
    cdef const double[::1] sv = np.ascontiguousarray(signs, dtype=np.float64)
    cdef Py_ssize_t n = bv.shape[0]
    cdef Py_ssize_t m = uv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef const double[:, ::1] ut = np.ascontiguousarray(np.asarray(vectors, dtype=np.float64).T)
    cdef Py_ssize_t i, jj, k
    cdef double g, v
    with nogil:
        for i in range(n):
            ov[i, i] = bv[i, i]
            for jj in range(i + 1, n):
                g = 0.0
                for k in range(m):
                    g = g + ut[i, k] * ut[jj, k]
                v = sv[i] * sv[jj] * (bv[i, jj] + eps * g)
                ov[i, jj] = v
                ov[jj, i] = v
    return out


def row_sumsq(mat):
    cdef const double[:, ::1] mv = np.ascontiguousarray(mat, dtype=np.float64)
    cdef Py_ssize_t n = mv.shape[0]
    cdef Py_ssize_t m = mv.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, k
    cdef double s
    with nogil:
        for i in range(n):
            s = 0.0
            for k in range(m):
                s = s + mv[i, k] * mv[i, k]
            ov[i] = s
    return out


def offdiag_abs_range(mat):
    cdef const double[:, ::1] mv = np.ascontiguousarray(mat, dtype=np.float64)
    cdef Py_ssize_t n = mv.shape[0]
    cdef Py_ssize_t i, jj
    cdef double lo = np.inf, hi = 0.0, a
    with nogil:
        for i in range(n):
            for jj in range(i + 1, n):
                a = fabs(mv[i, jj])
                if isnan(a):
                    lo = NAN
                    hi = NAN
                    break
                if a < lo:
                    lo = a
                if a > hi:
                    hi = a
            if isnan(lo):
                break
    if n < 2:
        return np.inf, 0.0
    return lo, hi
