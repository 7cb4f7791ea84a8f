"""Consensus between Gaussian observations in a common frame.

Two observations agree when their generalized Mahalanobis distance
``d2 = 0.5 * D^T S_a (S_a + S_b)^-1 S_b D`` is at most 1, where ``S`` are
the information matrices and ``D`` the difference of positions. The
consensus estimate is the information-weighted mean, which is also the
minimiser of the two-member quadratic objective.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import networkx as nx
import numpy as np

from . import kernels
from .gaussian import (
    DimensionError,
    FrameTransform,
    GaussianObservation,
    _frozen,
    as_matrix,
    as_vector,
    check_spd,
    density,
    safe_inv,
    transform_information,
)


@dataclass(frozen=True)
class CommonFrameObservation:
    """Position and information matrix (inverse covariance) in the common frame."""

    position: np.ndarray
    information: np.ndarray

    def __post_init__(self):
        pos = as_vector(self.position)
        info = as_matrix(self.information)
        if info.shape[0] != pos.shape[0]:
            raise DimensionError(
                f"information is {info.shape} but position has dimension {pos.shape[0]}"
            )
        check_spd(info, "information")
        object.__setattr__(self, "position", _frozen(pos))
        object.__setattr__(self, "information", _frozen(info))

    @property
    def dim(self) -> int:
        return self.position.shape[0]

    @property
    def covariance(self) -> np.ndarray:
        return safe_inv(self.information, "information")

    @classmethod
    def from_gaussian(cls, obs: GaussianObservation, frame: FrameTransform | None = None):
        pos, info = transform_information(obs, frame or FrameTransform.identity())
        return cls(pos, info)


@dataclass(frozen=True)
class ConsensusResult:
    agrees: bool
    mahalanobis_sq: float
    estimate: np.ndarray | None = None


@dataclass(frozen=True)
class Coalition:
    """Indices of observations that pairwise admit a consensus."""

    members: tuple[int, ...]

    def __contains__(self, i) -> bool:
        return i in self.members

    def __len__(self) -> int:
        return len(self.members)


def _same_dim(*vs):
    d = vs[0].shape[0]
    for v in vs[1:]:
        if v.shape[0] != d:
            raise DimensionError(f"dimension mismatch: {d} vs {v.shape[0]}")


def convexity_condition(obs: GaussianObservation, theta) -> bool:
    """True iff ``(theta - z)^T cov^-1 (theta - z) <= 1``."""
    return _quad_form(obs, theta) <= 1.0


def _quad_form(obs: GaussianObservation, theta) -> float:
    t = as_vector(theta)
    _same_dim(obs.mean, t)
    d = t - obs.mean
    return float(d @ np.linalg.solve(obs.covariance, d))


def curvature(obs: GaussianObservation, theta) -> float:
    """The bracketed second-derivative expression ``[1 - q(theta)] * N(theta; z, cov)``.

    Its sign matches :func:`convexity_condition` exactly, since both use
    the same quadratic form ``q``.
    """
    return (1.0 - _quad_form(obs, theta)) * density(obs, theta)


def pair_objective(a: CommonFrameObservation, b: CommonFrameObservation, theta) -> float:
    t = as_vector(theta)
    _same_dim(a.position, b.position, t)
    da = t - a.position
    db = t - b.position
    return 0.5 * float(da @ a.information @ da) + 0.5 * float(db @ b.information @ db)


def fuse_pair(a: CommonFrameObservation, b: CommonFrameObservation) -> np.ndarray:
    """Information-weighted mean ``(S_a + S_b)^-1 (S_a z_a + S_b z_b)``."""
    _same_dim(a.position, b.position)
    total = safe_inv(a.information + b.information, "combined information")
    return total @ (a.information @ a.position + b.information @ b.position)


def fuse_all(observations: Sequence[CommonFrameObservation]) -> CommonFrameObservation:
    """Fold :func:`fuse_pair` over a group, accumulating information."""
    acc = observations[0]
    for obs in observations[1:]:
        acc = CommonFrameObservation(fuse_pair(acc, obs), acc.information + obs.information)
    return acc


def mahalanobis_sq(a: CommonFrameObservation, b: CommonFrameObservation) -> float:
    """Generalized Mahalanobis distance d2 between two observations.

    Computed as ``0.5 * D^T (P_a + P_b)^-1 D`` with ``P = S^-1``, which
    equals ``0.5 * D^T S_a (S_a + S_b)^-1 S_b D`` and is exactly symmetric
    in floating point because matrix addition commutes.
    """
    _same_dim(a.position, b.position)
    delta = a.position - b.position
    pooled = a.covariance + b.covariance
    return 0.5 * float(delta @ np.linalg.solve(pooled, delta))


def pair_consensus(a: CommonFrameObservation, b: CommonFrameObservation) -> ConsensusResult:
    d2 = mahalanobis_sq(a, b)
    if d2 <= 1.0:
        return ConsensusResult(True, d2, fuse_pair(a, b))
    return ConsensusResult(False, d2, None)


def pairwise_mahalanobis_sq(observations: Sequence[CommonFrameObservation]) -> np.ndarray:
    n = len(observations)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = mahalanobis_sq(observations[i], observations[j])
    return out


def group_disagreement(observations: Sequence[CommonFrameObservation], shared_information) -> float:
    """``(1 / 2n^2) * sum_i sum_j d2_ij`` over all ordered pairs, for a shared information matrix."""
    n = len(observations)
    if n < 2:
        raise ValueError("group consensus needs at least two observations")
    shared = as_matrix(shared_information)
    for k, obs in enumerate(observations):
        if obs.information.shape != shared.shape or not np.allclose(
            obs.information, shared, rtol=1e-12, atol=0.0
        ):
            raise ValueError(
                f"observation {k} does not use the shared information matrix"
            )
    total = float(np.sum(pairwise_mahalanobis_sq(observations)))
    return total / (2.0 * n * n)


def group_consensus(observations: Sequence[CommonFrameObservation], shared_information) -> bool:
    return group_disagreement(observations, shared_information) <= 1.0


def partition_coalitions(observations: Sequence[CommonFrameObservation]) -> list[Coalition]:
    """Maximal groups of pairwise-agreeing observations (may overlap).

    Observations that agree with nobody come back as singletons. Output is
    sorted largest first, then by member indices.
    """
    n = len(observations)
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    d2 = pairwise_mahalanobis_sq(observations)
    for i in range(n):
        for j in range(i + 1, n):
            if d2[i, j] <= 1.0:
                graph.add_edge(i, j)
    cliques = [tuple(sorted(c)) for c in nx.find_cliques(graph)]
    cliques.sort(key=lambda c: (-len(c), c))
    return [Coalition(c) for c in cliques]


def grid_minimize_pair_objective(
    a: CommonFrameObservation,
    b: CommonFrameObservation,
    points_per_axis: int = 10_000,
    pad_sd: float = 5.0,
):
    """Brute-force minimum of :func:`pair_objective` on a dense grid.

    The grid spans the bounding box of the two positions padded by
    ``pad_sd`` standard deviations (largest marginal of either member).
    Only 1-D and 2-D are supported. Returns ``(theta, value)``.
    """
    _same_dim(a.position, b.position)
    d = a.dim
    sd = np.sqrt(np.maximum(np.diag(a.covariance), np.diag(b.covariance)))
    lo = np.minimum(a.position, b.position) - pad_sd * sd
    hi = np.maximum(a.position, b.position) + pad_sd * sd
    axes = [np.linspace(lo[k], hi[k], points_per_axis) for k in range(d)]
    if d == 1:
        x, val = kernels.grid_min_quadratic_1d(
            axes[0],
            float(a.position[0]), float(a.information[0, 0]),
            float(b.position[0]), float(b.information[0, 0]),
        )
        return np.array([x]), val
    if d == 2:
        xy, val = kernels.grid_min_quadratic_2d(
            axes[0], axes[1],
            np.ascontiguousarray(a.position), np.ascontiguousarray(a.information),
            np.ascontiguousarray(b.position), np.ascontiguousarray(b.information),
        )
        return np.array(xy), val
    raise DimensionError("grid search supports 1-D and 2-D observations only")
