# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops.

Every function here has a numpy twin in ``_fallback`` with the same
signature and semantics; ``teamfusion.kernels`` picks one at import.
"""

import numpy as np


def grid_min_quadratic_1d(const double[::1] xs, double a, double ia, double b, double ib):
    """Minimise ``0.5*ia*(x-a)**2 + 0.5*ib*(x-b)**2`` over the points ``xs``.

    Returns ``(argmin, min_value)``. Ties resolve to the lowest index.
    """
    cdef Py_ssize_t k, n = xs.shape[0], best_k = 0
    cdef double x, da, db, f, best = 1.0e300
    for k in range(n):
        x = xs[k]
        da = x - a
        db = x - b
        f = 0.5 * ia * da * da + 0.5 * ib * db * db
        if f < best:
            best = f
            best_k = k
    return xs[best_k], best


def grid_min_quadratic_2d(const double[::1] xs, const double[::1] ys,
                          const double[::1] a, const double[:, ::1] A,
                          const double[::1] b, const double[:, ::1] B):
    """Minimise the two-member quadratic objective over the grid ``xs x ys``.

    The objective is ``0.5*(p-a)^T A (p-a) + 0.5*(p-b)^T B (p-b)`` with
    ``p = (x, y)``. Terms depending on ``y`` alone are tabulated once per
    column. Returns ``((x, y), min_value)``.
    """
    cdef Py_ssize_t i, j, nx = xs.shape[0], ny = ys.shape[0]
    cdef Py_ssize_t bi = 0, bj = 0
    cdef double a01 = A[0, 1] + A[1, 0], b01 = B[0, 1] + B[1, 0]
    cdef double ax, bx, row, ca, cb, f, best = 1.0e300
    cdef double[::1] ay = np.empty(ny)
    cdef double[::1] by = np.empty(ny)
    cdef double[::1] g = np.empty(ny)
    for j in range(ny):
        ay[j] = ys[j] - a[1]
        by[j] = ys[j] - b[1]
        g[j] = 0.5 * (A[1, 1] * ay[j] * ay[j] + B[1, 1] * by[j] * by[j])
    for i in range(nx):
        ax = xs[i] - a[0]
        bx = xs[i] - b[0]
        row = 0.5 * (A[0, 0] * ax * ax + B[0, 0] * bx * bx)
        ca = 0.5 * a01 * ax
        cb = 0.5 * b01 * bx
        for j in range(ny):
            f = row + ca * ay[j] + cb * by[j] + g[j]
            if f < best:
                best = f
                bi = i
                bj = j
    return (xs[bi], ys[bj]), best


def pareto_mask(const double[:, ::1] payoffs, double tol=0.0):
    """Flag rows not weakly dominated by any other row.

    Row q dominates row p when it is >= p - tol everywhere and > p + tol somewhere.
    """
    cdef Py_ssize_t p, q, k, n = payoffs.shape[0], m = payoffs.shape[1]
    cdef bint ge, gt
    out = np.ones(n, dtype=np.bool_)
    cdef unsigned char[::1] keep = out.view(np.uint8)
    for p in range(n):
        for q in range(n):
            if q == p:
                continue
            ge = True
            gt = False
            for k in range(m):
                if payoffs[q, k] < payoffs[p, k] - tol:
                    ge = False
                    break
                if payoffs[q, k] > payoffs[p, k] + tol:
                    gt = True
            if ge and gt:
                keep[p] = 0
                break
    return out
