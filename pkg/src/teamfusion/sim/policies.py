"""Pursuer decision policies and the evader flee rule."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .model import Obstacle, Robot, wrap_angle

LOCAL = "local"
GLOBAL = "global_linear_pool"
MIXED = "mixed"
POLICY_KINDS = (LOCAL, GLOBAL, MIXED)

FLEE = "flee"


@dataclass(frozen=True)
class Policy:
    kind: str
    incentive_scale: float = 20.0     # distance scale of the closeness utility
    incentive_weight: float = 1.0     # multiplier on the team utility offered as incentive
    avoidance_gain: float = 1.0
    avoidance_horizon: float = 2.0    # in obstacle radii

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}; expected one of {POLICY_KINDS}")
        if not self.incentive_scale > 0:
            raise ValueError("incentive_scale must be positive")
        if self.avoidance_gain < 0 or self.incentive_weight < 0:
            raise ValueError("policy gains must be nonnegative")


@dataclass(frozen=True)
class ExecutiveOrder:
    target_id: str
    target_xy: tuple[float, float]
    incentive: float


@dataclass(frozen=True)
class Decision:
    desired_heading: float
    target_id: str | None = None
    agree: bool | None = None         # None when the policy has no executive
    incentive: float = 0.0
    obstacle_utility: float = 0.0


def obstacle_term(x: float, y: float, heading: float, obstacles: Sequence[Obstacle],
                  gain: float, horizon: float) -> tuple[float, float]:
    """Repulsive deflection and avoidance utility for travel along ``heading``.

    Obstacles whose clearance is within ``horizon`` radii and that lie
    ahead contribute ``gain * cos(offset) / clearance`` both to the utility
    and, signed away from the obstacle, to the deflection. The deflection
    is capped at pi/2.
    """
    deflection = utility = 0.0
    for o in obstacles:
        c = o.clearance(x, y)
        if c > horizon * o.radius:
            continue
        offset = wrap_angle(math.atan2(o.y - y, o.x - x) - heading)
        ahead = math.cos(offset)
        if ahead <= 0.0:
            continue
        w = gain * ahead / max(c, 1e-6)
        utility += w
        deflection += -w if offset >= 0.0 else w
    cap = math.pi / 2
    return max(-cap, min(cap, deflection)), utility


def _bearing(robot: Robot, xy) -> float:
    return math.atan2(xy[1] - robot.state.y, xy[0] - robot.state.x)


def _idle_heading(robot: Robot, bounds) -> float:
    """Hold heading; a robot outside the field heads back to its centre."""
    x, y = robot.state.x, robot.state.y
    xmin, ymin, xmax, ymax = bounds
    if xmin <= x <= xmax and ymin <= y <= ymax:
        return robot.state.heading
    return math.atan2(0.5 * (ymin + ymax) - y, 0.5 * (xmin + xmax) - x)


def decide(policy: Policy, robot: Robot, local: Mapping[str, tuple[float, float]],
           order: ExecutiveOrder | None, obstacles: Sequence[Obstacle], bounds) -> Decision:
    """Desired heading of a pursuer under ``policy``.

    ``local`` holds the pursuer's own evader position estimates; ``order`` is
    the executive's designated target and offered incentive (ignored by the
    local policy).
    """
    x, y = robot.state.x, robot.state.y

    def avoid(heading):
        return obstacle_term(x, y, heading, obstacles,
                             policy.avoidance_gain, policy.avoidance_horizon)

    if policy.kind == LOCAL or order is None:
        if local:
            tid = min(sorted(local), key=lambda e: math.hypot(local[e][0] - x, local[e][1] - y))
            base = _bearing(robot, local[tid])
        else:
            tid, base = None, _idle_heading(robot, bounds)
        if policy.kind == GLOBAL:
            return Decision(base, tid)
        deflection, u_obs = avoid(base)
        return Decision(wrap_angle(base + deflection), tid, obstacle_utility=u_obs)

    base = _bearing(robot, order.target_xy)
    if policy.kind == GLOBAL:
        return Decision(wrap_angle(base), order.target_id, True, order.incentive)

    deflection, u_obs = avoid(base)
    if order.incentive >= u_obs:
        return Decision(wrap_angle(base), order.target_id, True, order.incentive, u_obs)
    return Decision(wrap_angle(base + deflection), order.target_id, False, order.incentive, u_obs)


def flee(robot: Robot, threats: Sequence[tuple[float, float]], obstacles: Sequence[Obstacle],
         bounds, n_headings: int = 72, margin: float = 0.5) -> float:
    """Evader heading: maximise distance to the nearest known pursuer.

    Evaders turn instantly, so any of ``n_headings`` evenly spaced headings
    is available. Headings that would leave the field (less ``margin``) or
    end within one step of an obstacle are discarded. With no known threat
    the evader keeps the feasible heading closest to its current one.
    """
    st = robot.state
    xmin, ymin, xmax, ymax = bounds
    best, best_score = st.heading, -math.inf
    for k in range(n_headings):
        h = wrap_angle(2.0 * math.pi * k / n_headings)
        nx, ny = st.x + st.speed * math.cos(h), st.y + st.speed * math.sin(h)
        if not (xmin + margin <= nx <= xmax - margin and ymin + margin <= ny <= ymax - margin):
            continue
        if any(o.clearance(nx, ny) < st.speed for o in obstacles):
            continue
        if threats:
            score = min(math.hypot(nx - tx, ny - ty) for tx, ty in threats)
        else:
            score = math.cos(wrap_angle(h - st.heading))
        if score > best_score:
            best, best_score = h, score
    return best
