"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np

# rows per chunk when sweeping a 2-D grid; bounds peak memory to ~80 MB
_CHUNK = 1000


def grid_min_quadratic_1d(xs, a, ia, b, ib):
    xs = np.asarray(xs, dtype=float)
    f = 0.5 * ia * (xs - a) ** 2 + 0.5 * ib * (xs - b) ** 2
    k = int(np.argmin(f))
    return float(xs[k]), float(f[k])


def grid_min_quadratic_2d(xs, ys, a, A, b, B):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    a01 = A[0, 1] + A[1, 0]
    b01 = B[0, 1] + B[1, 0]
    ay = ys - a[1]
    by = ys - b[1]
    fa_y = A[1, 1] * ay * ay
    fb_y = B[1, 1] * by * by
    best, best_xy = np.inf, (float(xs[0]), float(ys[0]))
    for start in range(0, xs.size, _CHUNK):
        ax = (xs[start:start + _CHUNK] - a[0])[:, None]
        bx = (xs[start:start + _CHUNK] - b[0])[:, None]
        f = 0.5 * (A[0, 0] * ax * ax + a01 * ax * ay + fa_y) \
            + 0.5 * (B[0, 0] * bx * bx + b01 * bx * by + fb_y)
        k = int(np.argmin(f))
        i, j = divmod(k, ys.size)
        if f[i, j] < best:
            best = float(f[i, j])
            best_xy = (float(xs[start + i]), float(ys[j]))
    return best_xy, best


def pareto_mask(payoffs, tol=0.0):
    payoffs = np.asarray(payoffs, dtype=float)
    n = payoffs.shape[0]
    keep = np.ones(n, dtype=bool)
    for p in range(n):
        ge = np.all(payoffs >= payoffs[p] - tol, axis=1)
        gt = np.any(payoffs > payoffs[p] + tol, axis=1)
        ge[p] = False
        if np.any(ge & gt):
            keep[p] = False
    return keep
