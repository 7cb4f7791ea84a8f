"""Opinion pools: team utilities built from member utilities.

A pool is a function ``L(u_1, ..., u_n)`` of member utility values.
Member utilities are callables of the decision ``theta``; in the Gaussian
case they are the observation likelihoods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import kernels
from .gaussian import GaussianObservation, as_vector, density

MemberUtility = Callable[[np.ndarray], float]

UNANIMITY_STEP = 1e-6


@dataclass(frozen=True)
class GaussianUtility:
    """Likelihood of a decision under a Gaussian observation."""

    observation: GaussianObservation

    def __call__(self, theta) -> float:
        return density(self.observation, theta)


@dataclass(frozen=True)
class NashPool:
    """Generalized Nash product ``c * prod(u_i ** alpha_i)``."""

    members: tuple
    exponents: tuple[float, ...]
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "exponents", tuple(float(a) for a in self.exponents))
        if len(self.exponents) != len(self.members):
            raise ValueError("one exponent per member required")
        if any(a < 0 for a in self.exponents):
            raise ValueError("Nash exponents must be nonnegative")
        if not self.scale > 0:
            raise ValueError("Nash scale must be positive")

    def combine(self, values: Sequence[float]) -> float:
        out = self.scale
        for u, a in zip(values, self.exponents):
            # 0 ** 0 == 1 keeps a zero-exponent member inert
            out *= 1.0 if a == 0.0 else u ** a
        return out


@dataclass(frozen=True)
class LinearPool:
    """Linear opinion pool ``sum(lambda_i * u_i)``, weights on the simplex."""

    members: tuple
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.weights) != len(self.members):
            raise ValueError("one weight per member required")
        if any(w < 0 for w in self.weights):
            raise ValueError("linear pool weights must be nonnegative")
        if abs(math.fsum(self.weights) - 1.0) > 1e-12:
            raise ValueError("linear pool weights must sum to 1")

    def combine(self, values: Sequence[float]) -> float:
        return math.fsum(w * u for w, u in zip(self.weights, values))


Pool = NashPool | LinearPool


def member_values(pool: Pool, theta) -> np.ndarray:
    return np.array([float(u(theta)) for u in pool.members])


def pool_value(pool: Pool, theta) -> float:
    return pool.combine(member_values(pool, theta))


@dataclass
class GroupRationalityReport:
    unanimity: bool
    no_dictator: bool
    indifference: bool
    details: dict = field(default_factory=dict)

    @property
    def rational(self) -> bool:
        return self.unanimity and self.no_dictator and self.indifference


def check_group_rationality(pool: Pool, theta_grid) -> GroupRationalityReport:
    """Numerically check unanimity, no-dictator and indifference on a grid.

    * unanimity: a forward perturbation of 1e-6 on each member value must
      strictly raise the pool value at every grid point;
    * no dictator: at grid points where every member is nonzero, the pool
      must not coincide with any single member everywhere;
    * indifference: grid points with equal member-utility vectors must get
      equal pool values, and the pool evaluated through ``theta`` must match
      the pool of the utility vector alone.
    """
    grid = [as_vector(t) for t in theta_grid]
    if not grid:
        raise ValueError("empty theta grid")
    U = np.array([member_values(pool, t) for t in grid])
    L = np.array([pool.combine(u) for u in U])
    n = U.shape[1]

    failed_at = []
    for k, u in enumerate(U):
        for i in range(n):
            bumped = u.copy()
            bumped[i] += UNANIMITY_STEP
            if not pool.combine(bumped) > L[k]:
                failed_at.append((k, i))
    unanimity = not failed_at

    nonzero = np.all(U != 0.0, axis=1)
    dictators = []
    if np.any(nonzero):
        for j in range(n):
            if np.allclose(L[nonzero], U[nonzero, j], rtol=1e-12, atol=0.0):
                dictators.append(j)
    no_dictator = not dictators

    indifferent = True
    seen: dict[tuple, float] = {}
    for k, u in enumerate(U):
        key = tuple(u)
        if key in seen and seen[key] != L[k]:
            indifferent = False
        seen.setdefault(key, L[k])
        if pool_value(pool, grid[k]) != L[k]:
            indifferent = False

    return GroupRationalityReport(
        unanimity,
        no_dictator,
        indifferent,
        {"unanimity_failures": failed_at, "dictators": dictators},
    )


def jensen_gap(pool: Pool, theta_samples, weights) -> float:
    """``E[L(u(theta))] - L(E[u(theta)])`` under a discrete distribution."""
    w = np.asarray(weights, dtype=float)
    if abs(math.fsum(w) - 1.0) > 1e-12 or np.any(w < 0):
        raise ValueError("weights must be a probability vector")
    U = np.array([member_values(pool, t) for t in theta_samples])
    expected_pool = math.fsum(wk * pool.combine(u) for wk, u in zip(w, U))
    pooled_expectation = pool.combine(w @ U)
    return expected_pool - pooled_expectation


def jensen_consensus_check(pool: Pool, theta_samples, weights, rtol: float = 1e-12) -> bool:
    """True iff ``E[L(u)] >= L(E[u])`` up to round-off of relative size ``rtol``."""
    w = np.asarray(weights, dtype=float)
    U = np.array([member_values(pool, t) for t in theta_samples])
    scale = max(1.0, abs(pool.combine(w @ U)))
    return jensen_gap(pool, theta_samples, weights) >= -rtol * scale


@dataclass(frozen=True)
class RiskCurve:
    """Member-utility pairs ``(u_a(theta), u_b(theta))`` traced over a grid."""

    thetas: np.ndarray
    samples: np.ndarray  # shape (k, 2)

    def __len__(self) -> int:
        return self.samples.shape[0]


def default_theta_grid(a: GaussianObservation, b: GaussianObservation,
                       n: int = 2001, span_sd: float = 8.0) -> np.ndarray:
    """Scalar grid covering both observations out to ``span_sd`` deviations."""
    sa = math.sqrt(a.covariance[0, 0])
    sb = math.sqrt(b.covariance[0, 0])
    lo = min(a.mean[0] - span_sd * sa, b.mean[0] - span_sd * sb)
    hi = max(a.mean[0] + span_sd * sa, b.mean[0] + span_sd * sb)
    return np.linspace(lo, hi, n)


def risk_curve(a: GaussianObservation, b: GaussianObservation, theta_grid=None) -> RiskCurve:
    if a.dim != 1 or b.dim != 1:
        raise ValueError("risk curves are defined for scalar observations only")
    grid = default_theta_grid(a, b) if theta_grid is None else np.asarray(theta_grid, float)
    samples = np.column_stack([_scalar_density(a, grid), _scalar_density(b, grid)])
    return RiskCurve(grid, samples)


def _scalar_density(obs: GaussianObservation, grid: np.ndarray) -> np.ndarray:
    var = obs.covariance[0, 0]
    return np.exp(-0.5 * (grid - obs.mean[0]) ** 2 / var) / math.sqrt(2.0 * math.pi * var)


def pareto_front(points: np.ndarray) -> np.ndarray:
    """Indices of points on the upper-right Pareto boundary."""
    return np.flatnonzero(kernels.pareto_mask(np.ascontiguousarray(points, dtype=float)))


def curve_convexity_test(curve: RiskCurve, tol: float = 1e-9) -> bool:
    """True iff the upper-right boundary of the curve is on its convex hull.

    Both axes are first scaled to peak 1. A Pareto point counts as on the
    hull when its signed distance to the nearest hull edge is within
    ``tol``. A point set with no 2-D extent (all points on one line) is
    convex by convention.
    """
    pts = np.asarray(curve.samples, dtype=float)
    if pts.shape[0] < 3:
        raise ValueError("convexity test needs at least 3 samples")
    peak = pts.max(axis=0)
    if np.any(peak <= 0):
        return True
    pts = pts / peak
    try:
        hull = ConvexHull(pts)
    except QhullError:
        return True
    # equations rows are (nx, ny, c) with n.p + c <= 0 inside
    normals, offsets = hull.equations[:, :2], hull.equations[:, 2]
    for k in pareto_front(pts):
        if np.max(normals @ pts[k] + offsets) < -tol:
            return False
    return True
