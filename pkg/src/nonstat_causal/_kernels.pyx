# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled lag-operator kernels (same contracts as ``_kernels_py``)."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline Py_ssize_t _row(Py_ssize_t i, Py_ssize_t n) nogil:
    if i < 0:
        return 0
    if i >= n:
        return n - 1
    return i


def tv_apply(coeffs, x):
    cdef const double[:, ::1] c = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0], width = c.shape[1], t, j
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double acc
    with nogil:
        for t in range(n):
            acc = 0.0
            for j in range(width):
                if j > t:
                    break
                acc += c[t, j] * xv[t - j]
            o[t] = acc
    return out


def tv_compose(a, b):
    cdef const double[:, ::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[:, ::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n = av.shape[0], wa = av.shape[1], wb = bv.shape[1]
    cdef Py_ssize_t t, j, k, r
    out = np.zeros((n, wa + wb - 1))
    cdef double[:, ::1] o = out
    with nogil:
        for t in range(n):
            for j in range(wa):
                r = _row(t - j, n)
                for k in range(wb):
                    o[t, j + k] += av[t, j] * bv[r, k]
    return out


def tv_invert(coeffs, Py_ssize_t r_max):
    cdef const double[:, ::1] c = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0], p = c.shape[1] - 1, t, i, j, jmax
    theta = np.zeros((n, r_max + 1))
    cdef double[:, ::1] th = theta
    cdef double acc
    with nogil:
        for t in range(n):
            th[t, 0] = 1.0 / c[t, 0]
            for i in range(1, r_max + 1):
                acc = 0.0
                jmax = p if p < i else i
                for j in range(1, jmax + 1):
                    acc += th[t, i - j] * c[_row(t - i + j, n), j]
                th[t, i] = -acc / c[_row(t - i, n), 0]
    return theta


def tv_backward(coeffs, double ratio, Py_ssize_t q_max):
    cdef const double[:, ::1] c = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0], p = c.shape[1] - 1, t, i, j, jmax
    psi = np.zeros((n, q_max + 1))
    cdef double[:, ::1] ps = psi
    cdef double acc, phi
    with nogil:
        for t in range(n):
            if p == 0:
                phi = c[t, 0]
                ps[t, 0] = phi / (phi * phi + ratio)
                continue
            ps[t, 0] = 1.0 / c[t, 0]
            for i in range(1, q_max + 1):
                acc = 0.0
                jmax = p if p < i else i
                for j in range(1, jmax + 1):
                    acc += ps[t, i - j] * c[_row(t - i + j, n), j]
                if i >= p and ratio != 0.0:
                    acc += ratio * ps[t, i - p] / c[_row(t + p - i, n), p]
                ps[t, i] = -acc / c[_row(t - i, n), 0]
    return psi


def companion_norms(coeffs, Py_ssize_t n_blocks):
    cdef const double[:, ::1] c = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0], p = c.shape[1] - 1
    cdef Py_ssize_t t, step, j, row, col, base
    out = np.zeros((n, n_blocks))
    if p == 0:
        return out
    cdef double[:, ::1] o = out
    prod_arr = np.empty((p, p))
    last_arr = np.empty(p)
    cdef double[:, ::1] prod = prod_arr
    cdef double[::1] last = last_arr
    cdef double lead, s, best
    with nogil:
        for t in range(n):
            for row in range(p):
                for col in range(p):
                    prod[row, col] = 1.0 if row == col else 0.0
            for step in range(1, n_blocks * p + 1):
                base = t - (step + p - 1)
                lead = c[_row(base, n), 0]
                # new last row = -sum_j a_j * prod[p - j]
                for col in range(p):
                    s = 0.0
                    for j in range(1, p + 1):
                        s -= c[_row(base + j, n), j] / lead * prod[p - j, col]
                    last[col] = s
                for row in range(p - 1):
                    for col in range(p):
                        prod[row, col] = prod[row + 1, col]
                for col in range(p):
                    prod[p - 1, col] = last[col]
                if step % p == 0:
                    best = 0.0
                    for row in range(p):
                        s = 0.0
                        for col in range(p):
                            s += prod[row, col] if prod[row, col] >= 0 else -prod[row, col]
                        if s > best:
                            best = s
                    o[t, step // p - 1] = best
    return out
