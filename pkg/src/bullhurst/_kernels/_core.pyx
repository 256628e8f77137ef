# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: sliding-window fluctuation functions and the
GARCH(1,1) likelihood recursion.  Mirrors pyfallback.py."""
from libc.math cimport log, sqrt, isfinite, M_PI

import numpy as np

cimport numpy as cnp

cnp.import_array()

RULE_N_MINUS_1 = 0
RULE_FLOOR_N = 1


def fdmaa_fluctuation_matrix(r, Py_ssize_t window, n_grid, int rule):
    """F(n) per sliding window of `window` consecutive values of r."""
    cdef const double[::1] rv = np.ascontiguousarray(r, dtype=np.float64)
    cdef const cnp.int64_t[::1] grid = np.ascontiguousarray(n_grid, dtype=np.int64)
    cdef Py_ssize_t T = rv.shape[0]
    cdef Py_ssize_t n_windows = T - window + 1
    if n_windows < 1:
        raise ValueError("series shorter than the window")
    cdef Py_ssize_t n_scales = grid.shape[0]
    out_arr = np.empty((n_windows, n_scales), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    y_arr = np.empty(window, dtype=np.float64)
    c_arr = np.empty(window + 1, dtype=np.float64)
    cdef double[::1] y = y_arr
    cdef double[::1] c = c_arr
    cdef Py_ssize_t w, i, j, v, p, n, m, count
    cdef double acc, seg_acc, eps, ma
    for w in range(n_windows):
        acc = 0.0
        c[0] = 0.0
        for i in range(window):
            acc += rv[w + i]
            y[i] = acc
            c[i + 1] = c[i] + acc
        for j in range(n_scales):
            n = grid[j]
            m = window - n + 1
            if rule == 0:
                count = window // (n - 1)
            else:
                count = window // n
            if count > m // n:
                count = m // n
            if count < 1:
                out[w, j] = np.nan
                continue
            acc = 0.0
            for v in range(count):
                seg_acc = 0.0
                for i in range(n):
                    p = (n - 1) + v * n + i
                    ma = (c[p + 1] - c[p + 1 - n]) / n
                    eps = y[p] - ma
                    seg_acc += eps * eps
                acc += seg_acc / n
            out[w, j] = sqrt(acc / count)
    return out_arr


def garch_sigma2(r, double mu, double omega, double alpha, double beta,
                 double s2_init):
    """Conditional variance recursion s2[t] = omega + alpha e2[t-1] + beta s2[t-1]."""
    cdef const double[::1] rv = np.ascontiguousarray(r, dtype=np.float64)
    cdef Py_ssize_t T = rv.shape[0]
    out_arr = np.empty(T, dtype=np.float64)
    cdef double[::1] s2 = out_arr
    cdef Py_ssize_t t
    cdef double e
    s2[0] = s2_init
    for t in range(1, T):
        e = rv[t - 1] - mu
        s2[t] = omega + alpha * e * e + beta * s2[t - 1]
    return out_arr


def garch_nll_grad(r, double mu, double omega, double alpha, double beta,
                   double s2_init):
    """Mean Gaussian negative log-likelihood and gradient in natural params."""
    cdef const double[::1] rv = np.ascontiguousarray(r, dtype=np.float64)
    cdef Py_ssize_t T = rv.shape[0]
    cdef double s2 = s2_init
    cdef double d_mu = 0.0, d_om = 0.0, d_al = 0.0, d_be = 0.0
    cdef double g_mu = 0.0, g_om = 0.0, g_al = 0.0, g_be = 0.0
    cdef double nll = 0.0
    cdef double log2pi = log(2.0 * M_PI)
    cdef Py_ssize_t t
    cdef double e, e2, q, s2_prev, e_prev
    for t in range(T):
        e = rv[t] - mu
        e2 = e * e
        if s2 <= 0.0 or not isfinite(s2):
            return np.inf, np.zeros(4)
        nll += 0.5 * (log2pi + log(s2) + e2 / s2)
        q = 0.5 * (1.0 / s2 - e2 / (s2 * s2))
        g_mu += q * d_mu - e / s2
        g_om += q * d_om
        g_al += q * d_al
        g_be += q * d_be
        # advance the variance recursion and its parameter derivatives
        s2_prev = s2
        e_prev = e
        s2 = omega + alpha * e2 + beta * s2_prev
        d_mu = -2.0 * alpha * e_prev + beta * d_mu
        d_om = 1.0 + beta * d_om
        d_al = e_prev * e_prev + beta * d_al
        d_be = s2_prev + beta * d_be
    return nll / T, np.array([g_mu, g_om, g_al, g_be]) / T
