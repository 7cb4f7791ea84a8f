"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from teamfusion import _fallback

try:
    from teamfusion import _kernels
except ImportError:  # extension not built
    _kernels = None


def cases():
    rng = np.random.default_rng(0)
    xs = np.linspace(-10, 10, 10_000)
    A = np.array([[2.0, 0.3], [0.3, 1.0]])
    B = np.array([[0.5, -0.1], [-0.1, 0.8]])
    a, b = np.array([0.0, 1.0]), np.array([2.0, -1.0])
    payoffs = np.ascontiguousarray(rng.integers(0, 20, size=(729, 2)).astype(float))
    return {
        "grid_min_quadratic_1d (1e4 points)":
            lambda m: m.grid_min_quadratic_1d(xs, 0.0, 1.0, 3.0, 2.0),
        "grid_min_quadratic_2d (1e4 x 1e4)":
            lambda m: m.grid_min_quadratic_2d(xs, xs, a, A, b, B),
        "pareto_mask (729 x 2)":
            lambda m: m.pareto_mask(payoffs),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if _kernels is None:
        print("compiled extension not available; only the fallback can be timed")
    print(f"{'kernel':38s} {'cython (ms)':>12s} {'numpy (ms)':>12s} {'speedup':>8s}")
    for name, fn in cases().items():
        t_py = min(timeit.repeat(lambda: fn(_fallback), number=1, repeat=args.repeat))
        if _kernels is None:
            print(f"{name:38s} {'-':>12s} {1e3 * t_py:12.3f} {'-':>8s}")
            continue
        t_c = min(timeit.repeat(lambda: fn(_kernels), number=1, repeat=args.repeat))
        print(f"{name:38s} {1e3 * t_c:12.3f} {1e3 * t_py:12.3f} {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()
