"""Backend selection for the numeric hot loops.

The compiled Cython module is used when it was built and importable;
otherwise the numpy fallback is used. Setting ``TEAMFUSION_PURE_PYTHON=1``
forces the fallback (used by the test-suite to check both agree).
"""

import os

from . import _fallback

if os.environ.get("TEAMFUSION_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

grid_min_quadratic_1d = _impl.grid_min_quadratic_1d
grid_min_quadratic_2d = _impl.grid_min_quadratic_2d
pareto_mask = _impl.pareto_mask

__all__ = [
    "BACKEND",
    "grid_min_quadratic_1d",
    "grid_min_quadratic_2d",
    "pareto_mask",
]
