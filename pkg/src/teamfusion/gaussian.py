"""Gaussian observations, densities and frame transformations.

Vectors and matrices are plain numpy arrays. Scalars are promoted to
1-vectors / 1x1 matrices so that every routine works in one code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

SYMMETRY_TOL = 1e-9
MAX_CONDITION = 1e12


class GaussianError(ValueError):
    """Base class for malformed Gaussian inputs."""


class DimensionError(GaussianError):
    pass


class NotPositiveDefiniteError(GaussianError):
    pass


class SingularMatrixError(GaussianError):
    """Matrix singular or too badly conditioned to invert safely."""


class SingularJacobianError(SingularMatrixError):
    pass


def as_vector(v) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise GaussianError("vector has non-finite components")
    return arr


def as_matrix(m) -> np.ndarray:
    arr = np.asarray(m, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise GaussianError("matrix has non-finite entries")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def check_spd(m: np.ndarray, what: str = "matrix") -> None:
    """Raise NotPositiveDefiniteError unless ``m`` is symmetric positive definite."""
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.T)) > SYMMETRY_TOL * scale:
        raise NotPositiveDefiniteError(f"{what} is not symmetric")
    if np.min(np.linalg.eigvalsh(m)) <= 0.0:
        raise NotPositiveDefiniteError(f"{what} is not positive definite")


def safe_inv(m: np.ndarray, what: str = "matrix", exc=SingularMatrixError) -> np.ndarray:
    """Invert a small matrix, refusing anything with condition number above 1e12."""
    m = as_matrix(m)
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise exc(f"{what} is singular or ill-conditioned (cond={cond:.3g})")
    return np.linalg.inv(m)


def _check_dims(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")


@dataclass(frozen=True)
class GaussianObservation:
    """An observation mean with its covariance, N(mean, covariance)."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = as_vector(self.mean)
        cov = as_matrix(self.covariance)
        if cov.shape[0] != mean.shape[0]:
            raise DimensionError(
                f"covariance is {cov.shape} but mean has dimension {mean.shape[0]}"
            )
        check_spd(cov, "covariance")
        object.__setattr__(self, "mean", _frozen(mean))
        object.__setattr__(self, "covariance", _frozen(cov))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class FrameTransform:
    """A map from a sensor frame into the common frame, plus its Jacobian."""

    map: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]

    def __call__(self, z) -> np.ndarray:
        return as_vector(self.map(as_vector(z)))

    def jacobian_at(self, z) -> np.ndarray:
        return as_matrix(self.jacobian(as_vector(z)))

    @classmethod
    def identity(cls) -> FrameTransform:
        return cls(lambda z: z, lambda z: np.eye(z.shape[0]))

    @classmethod
    def linear(cls, matrix, offset=None) -> FrameTransform:
        """``z -> matrix @ z + offset``."""
        M = as_matrix(matrix)
        c = np.zeros(M.shape[0]) if offset is None else as_vector(offset)
        return cls(lambda z: M @ z + c, lambda z: M)

    @classmethod
    def rotation(cls, angle: float, translation=(0.0, 0.0)) -> FrameTransform:
        c, s = math.cos(angle), math.sin(angle)
        return cls.linear([[c, -s], [s, c]], translation)

    @classmethod
    def polar_to_planar(cls, origin=(0.0, 0.0), heading: float = 0.0) -> FrameTransform:
        """(range, bearing relative to ``heading``) -> world (x, y) about ``origin``."""
        ox, oy = float(origin[0]), float(origin[1])

        def fmap(z):
            r, b = z[0], z[1]
            return np.array([ox + r * math.cos(heading + b), oy + r * math.sin(heading + b)])

        def fjac(z):
            r, b = z[0], z[1]
            c, s = math.cos(heading + b), math.sin(heading + b)
            return np.array([[c, -r * s], [s, r * c]])

        return cls(fmap, fjac)

    def check_jacobian(self, points, rtol: float = 1e-5, step: float = 1e-6) -> bool:
        """Compare the supplied Jacobian against central finite differences.

        Each column is compared with relative tolerance ``rtol`` scaled by
        the column's magnitude (with a floor of 1 for near-zero columns).
        """
        for z in points:
            z = as_vector(z)
            J = self.jacobian_at(z)
            for k in range(z.shape[0]):
                h = step * max(1.0, abs(z[k]))
                e = np.zeros_like(z)
                e[k] = h
                fd = (self(z + e) - self(z - e)) / (2.0 * h)
                scale = max(1.0, float(np.max(np.abs(J[:, k]))))
                if np.max(np.abs(fd - J[:, k])) > rtol * scale:
                    return False
        return True


def density(obs: GaussianObservation, point) -> float:
    """Multivariate normal density of ``point`` under ``obs``."""
    x = as_vector(point)
    _check_dims(obs.mean, x)
    d = x - obs.mean
    q = float(d @ np.linalg.solve(obs.covariance, d))
    det = float(np.linalg.det(obs.covariance))
    k = obs.dim
    return math.exp(-0.5 * q) / math.sqrt((2.0 * math.pi) ** k * det)


def transform_covariance(obs: GaussianObservation, frame: FrameTransform):
    """First-order propagation of ``obs`` into the common frame.

    Returns ``(map(mean), J cov J^T)`` with ``J`` evaluated at the mean.
    """
    J = frame.jacobian_at(obs.mean)
    _check_dims(obs.mean, J)
    safe_inv(J, "jacobian", SingularJacobianError)
    cov = J @ obs.covariance @ J.T
    return frame(obs.mean), 0.5 * (cov + cov.T)


def transform_information(obs: GaussianObservation, frame: FrameTransform):
    """Map ``obs`` into the common frame and return ``(position, information)``.

    The information matrix is ``J^-T cov^-1 J^-1``, the inverse of the
    propagated covariance, with ``J`` the Jacobian of ``frame`` at the mean.
    For symmetric ``J`` (identity, scalar, symmetric linear maps) this is
    the same as ``J^-1 cov^-1 J^-T``.
    """
    J = frame.jacobian_at(obs.mean)
    _check_dims(obs.mean, J)
    Jinv = safe_inv(J, "jacobian", SingularJacobianError)
    info = Jinv.T @ safe_inv(obs.covariance, "covariance") @ Jinv
    info = 0.5 * (info + info.T)
    check_spd(info, "transformed information")
    return frame(obs.mean), info
