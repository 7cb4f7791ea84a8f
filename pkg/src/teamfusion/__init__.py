"""Team-theoretic multi-sensor fusion and a pursuit-evasion team game."""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
