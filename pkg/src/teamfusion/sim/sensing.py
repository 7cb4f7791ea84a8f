"""Range-bearing sensing, conversion to world-frame Gaussians, sensor pointing."""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from ..fusion import CommonFrameObservation
from ..gaussian import FrameTransform, GaussianObservation, safe_inv
from .model import Obstacle, Robot, RobotState, SensorReading, SensorSpec, wrap_angle

# Standard deviations below this are floored when building covariances so a
# noiseless sensor still yields an invertible information matrix. Sampling
# uses the configured value unchanged.
SD_FLOOR = 1e-4


def line_of_sight(x0, y0, x1, y1, obstacles: Sequence[Obstacle]) -> bool:
    return not any(o.blocks(x0, y0, x1, y1) for o in obstacles)


def sense(observer: Robot, target: Robot, spec: SensorSpec | None = None,
          rng: np.random.Generator | None = None, obstacles: Sequence[Obstacle] = (),
          step: int = 0) -> SensorReading | None:
    """Reading of ``target`` by ``observer``, or None when it cannot be seen.

    A reading exists when the target is within range, inside the pointing
    cone, and not occluded. Noise is drawn range first, then bearing.
    """
    if not (observer.alive and target.alive):
        return None
    spec = spec or observer.sensor
    o, t = observer.state, target.state
    dx, dy = t.x - o.x, t.y - o.y
    rng_true = math.hypot(dx, dy)
    if rng_true > spec.max_range:
        return None
    bearing = wrap_angle(math.atan2(dy, dx) - o.heading)
    if abs(wrap_angle(bearing - spec.pointing)) > spec.cone_half_angle:
        return None
    if not line_of_sight(o.x, o.y, t.x, t.y, obstacles):
        return None
    if rng is not None:
        rng_noise = rng.normal(0.0, spec.range_noise_sd) if spec.range_noise_sd > 0 else 0.0
        brg_noise = rng.normal(0.0, spec.bearing_noise_sd) if spec.bearing_noise_sd > 0 else 0.0
    else:
        rng_noise = brg_noise = 0.0
    return SensorReading(
        observer.id,
        target.id,
        max(0.0, rng_true + float(rng_noise)),
        wrap_angle(bearing + float(brg_noise)),
        step,
    )


def polar_covariance(spec: SensorSpec) -> np.ndarray:
    sr = max(spec.range_noise_sd, SD_FLOOR)
    sb = max(spec.bearing_noise_sd, SD_FLOOR)
    return np.diag([sr * sr, sb * sb])


def reading_to_observation(reading: SensorReading, observer_pose: RobotState,
                           spec: SensorSpec) -> CommonFrameObservation:
    """World-frame Gaussian position of the target from a polar reading."""
    polar = GaussianObservation([reading.measured_range, reading.measured_bearing],
                                polar_covariance(spec))
    frame = FrameTransform.polar_to_planar((observer_pose.x, observer_pose.y),
                                           observer_pose.heading)
    return CommonFrameObservation.from_gaussian(polar, frame)


def predicted_information(observer: RobotState, spec: SensorSpec, target_xy) -> np.ndarray | None:
    """Information one reading of a target at ``target_xy`` would contribute."""
    dx, dy = target_xy[0] - observer.x, target_xy[1] - observer.y
    rho = math.hypot(dx, dy)
    if rho < 1e-9:
        return None
    bearing = wrap_angle(math.atan2(dy, dx) - observer.heading)
    frame = FrameTransform.polar_to_planar((observer.x, observer.y), observer.heading)
    J = frame.jacobian_at([rho, bearing])
    Jinv = np.linalg.inv(J)
    return Jinv.T @ safe_inv(polar_covariance(spec)) @ Jinv


def information_gain(prior: np.ndarray, added: np.ndarray) -> float:
    """``0.5 * log(det(prior + added) / det(prior))``; infinite for a singular prior."""
    sign0, logdet0 = np.linalg.slogdet(prior)
    sign1, logdet1 = np.linalg.slogdet(prior + added)
    if sign0 <= 0:
        return math.inf
    return 0.5 * (logdet1 - logdet0)


def sensor_pointing(robot: Robot, estimates: Mapping[str, CommonFrameObservation]) -> float:
    """Pointing angle (relative to heading) with the largest expected information gain.

    Candidates are estimates the cone could cover this step. Ties go to the
    nearest evader. When nothing is reachable the sensor swings as far as it
    can toward the nearest estimate.
    """
    st, spec = robot.state, robot.sensor
    if not estimates:
        return spec.pointing
    scored = []
    for eid in sorted(estimates):
        est = estimates[eid]
        dx, dy = est.position[0] - st.x, est.position[1] - st.y
        dist = math.hypot(dx, dy)
        rel = wrap_angle(math.atan2(dy, dx) - st.heading)
        reachable = abs(rel) <= spec.max_pointing + spec.cone_half_angle and dist <= spec.max_range
        gain = -math.inf
        if reachable:
            added = predicted_information(st, spec, est.position)
            if added is not None:
                gain = information_gain(np.asarray(est.information), added)
        scored.append((gain, dist, eid, rel, reachable))
    reachable = [s for s in scored if s[4]]
    if reachable:
        best = max(reachable, key=lambda s: (s[0], -s[1]))
    else:
        best = min(scored, key=lambda s: (s[1], s[2]))
    rel = best[3]
    return max(-spec.max_pointing, min(spec.max_pointing, rel))
