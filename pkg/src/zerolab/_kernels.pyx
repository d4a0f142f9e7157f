# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled tridiagonal kernels for the implicit stepping loop."""

import numpy as np


def tridiag_solve(const double[::1] lower, const double[::1] diag,
                  const double[::1] upper, const double[::1] rhs):
    """Solve ``T x = rhs`` for tridiagonal ``T`` with the Thomas algorithm.

    ``lower[i]`` couples row ``i`` to ``i-1`` and ``upper[i]`` couples row
    ``i`` to ``i+1``; ``lower[0]`` and ``upper[-1]`` are ignored.  No
    pivoting: rows must be near diagonally dominant, which the implicit
    stepping matrices are by construction.
    """
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i
    x_arr = np.empty(n, dtype=np.float64)
    c_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef double[::1] cp = c_arr
    cdef double m

    m = diag[0]
    if m == 0.0:
        raise ZeroDivisionError("zero pivot in tridiagonal solve at row 0")
    cp[0] = upper[0] / m
    x[0] = rhs[0] / m
    for i in range(1, n):
        m = diag[i] - lower[i] * cp[i - 1]
        if m == 0.0:
            raise ZeroDivisionError("zero pivot in tridiagonal solve")
        cp[i] = upper[i] / m
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / m
    for i in range(n - 2, -1, -1):
        x[i] -= cp[i] * x[i + 1]
    return x_arr


def tridiag_apply(const double[::1] lower, const double[::1] diag,
                  const double[::1] upper, const double[::1] vec):
    """Return ``T vec`` for tridiagonal ``T`` (storage as in tridiag_solve)."""
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    if n == 1:
        out[0] = diag[0] * vec[0]
        return out_arr
    out[0] = diag[0] * vec[0] + upper[0] * vec[1]
    for i in range(1, n - 1):
        out[i] = lower[i] * vec[i - 1] + diag[i] * vec[i] + upper[i] * vec[i + 1]
    out[n - 1] = lower[n - 1] * vec[n - 2] + diag[n - 1] * vec[n - 1]
    return out_arr
