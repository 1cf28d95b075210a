"""Pure numpy versions of the lag-operator kernels.

Every routine here has a Cython twin in ``_kernels.pyx`` with the same
signature. Row indices that fall outside ``[0, T)`` are clamped to the edge,
i.e. the coefficient grid is extended as constant before ``t = 0`` and after
``t = T - 1``.
"""

import numpy as np


def _rows(idx, n_rows):
    return np.clip(idx, 0, n_rows - 1)


def tv_apply(coeffs, x):
    coeffs = np.asarray(coeffs, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    n, width = coeffs.shape
    out = coeffs[:, 0] * x
    for j in range(1, width):
        if j >= n:
            break
        out[j:] += coeffs[j:, j] * x[: n - j]
    return out


def tv_compose(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = a.shape[0]
    pa, pb = a.shape[1] - 1, b.shape[1] - 1
    out = np.zeros((n, pa + pb + 1))
    t = np.arange(n)
    for j in range(pa + 1):
        b_shift = b[_rows(t - j, n)]
        out[:, j : j + pb + 1] += a[:, j : j + 1] * b_shift
    return out


def tv_invert(coeffs, r_max):
    coeffs = np.asarray(coeffs, dtype=np.float64)
    n, width = coeffs.shape
    p = width - 1
    t = np.arange(n)
    theta = np.zeros((n, r_max + 1))
    theta[:, 0] = 1.0 / coeffs[:, 0]
    for i in range(1, r_max + 1):
        acc = np.zeros(n)
        for j in range(1, min(p, i) + 1):
            acc += theta[:, i - j] * coeffs[_rows(t - i + j, n), j]
        theta[:, i] = -acc / coeffs[_rows(t - i, n), 0]
    return theta


def tv_backward(coeffs, ratio, q_max):
    coeffs = np.asarray(coeffs, dtype=np.float64)
    n, width = coeffs.shape
    p = width - 1
    psi = np.zeros((n, q_max + 1))
    if p == 0:
        phi = coeffs[:, 0]
        psi[:, 0] = phi / (phi * phi + ratio)
        return psi
    t = np.arange(n)
    psi[:, 0] = 1.0 / coeffs[:, 0]
    for i in range(1, q_max + 1):
        acc = np.zeros(n)
        for j in range(1, min(p, i) + 1):
            acc += psi[:, i - j] * coeffs[_rows(t - i + j, n), j]
        if i >= p and ratio != 0.0:
            acc += ratio * psi[:, i - p] / coeffs[_rows(t + p - i, n), p]
        psi[:, i] = -acc / coeffs[_rows(t - i, n), 0]
    return psi


def companion_norms(coeffs, n_blocks):
    coeffs = np.asarray(coeffs, dtype=np.float64)
    n, width = coeffs.shape
    p = width - 1
    out = np.zeros((n, n_blocks))
    if p == 0:
        return out
    t = np.arange(n)
    prod = np.broadcast_to(np.eye(p), (n, p, p)).copy()
    for step in range(1, n_blocks * p + 1):
        base = _rows(t - (step + p - 1), n)
        lead = coeffs[base, 0]
        comp = np.zeros((n, p, p))
        if p > 1:
            comp[:, :-1, 1:] = np.eye(p - 1)
        for j in range(1, p + 1):
            comp[:, p - 1, p - j] = -coeffs[_rows(t - (step + p - 1) + j, n), j] / lead
        prod = comp @ prod
        if step % p == 0:
            out[:, step // p - 1] = np.abs(prod).sum(axis=2).max(axis=1)
    return out
