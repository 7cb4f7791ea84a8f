"""State types for the pursuit-evasion game, plus kinematics and geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

PURSUER = "pursuer"
EVADER = "evader"


def wrap_angle(a: float) -> float:
    """Map an angle into (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    elif a > math.pi:
        a -= 2.0 * math.pi
    return a


@dataclass(frozen=True)
class RobotState:
    x: float
    y: float
    heading: float
    speed: float
    turn_rate: float = math.inf
    alive: bool = True

    def __post_init__(self):
        if not self.speed > 0:
            raise ValueError("speed must be positive")
        if not self.turn_rate > 0:
            raise ValueError("turn rate must be positive (or infinite)")
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class SensorSpec:
    max_range: float
    cone_half_angle: float
    pointing: float = 0.0
    range_noise_sd: float = 0.0
    bearing_noise_sd: float = 0.0
    max_pointing: float = math.pi

    def __post_init__(self):
        if not self.max_range > 0:
            raise ValueError("sensor max_range must be positive")
        if not 0 < self.cone_half_angle <= math.pi:
            raise ValueError("sensor cone_half_angle must be in (0, pi]")
        if self.range_noise_sd < 0 or self.bearing_noise_sd < 0:
            raise ValueError("sensor noise standard deviations must be nonnegative")
        if not 0 <= self.max_pointing <= math.pi:
            raise ValueError("sensor max_pointing must be in [0, pi]")


@dataclass(frozen=True)
class SensorReading:
    observer_id: str
    target_id: str
    measured_range: float
    measured_bearing: float  # relative to the observer's heading
    step: int


@dataclass(frozen=True)
class BallisticsSpec:
    capture_radius: float
    shot_cost: float = 0.0
    miss_penalty: float = 0.0

    def __post_init__(self):
        if not self.capture_radius > 0:
            raise ValueError("capture_radius must be positive")

    def hit_probability(self, covariance_trace: float) -> float:
        """``exp(-trace(cov) / capture_radius**2)``; 1 for a perfect estimate."""
        return math.exp(-max(0.0, covariance_trace) / self.capture_radius ** 2)


@dataclass(frozen=True)
class Obstacle:
    x: float
    y: float
    radius: float

    def contains(self, x: float, y: float) -> bool:
        return math.hypot(x - self.x, y - self.y) < self.radius

    def clearance(self, x: float, y: float) -> float:
        return math.hypot(x - self.x, y - self.y) - self.radius

    def blocks(self, x0: float, y0: float, x1: float, y1: float) -> bool:
        """True if the segment (x0,y0)->(x1,y1) passes through the disc."""
        dx, dy = x1 - x0, y1 - y0
        seg2 = dx * dx + dy * dy
        if seg2 == 0.0:
            return self.contains(x0, y0)
        t = ((self.x - x0) * dx + (self.y - y0) * dy) / seg2
        t = min(1.0, max(0.0, t))
        return math.hypot(x0 + t * dx - self.x, y0 + t * dy - self.y) < self.radius


@dataclass(frozen=True)
class Robot:
    id: str
    role: str  # PURSUER or EVADER
    team: str
    state: RobotState
    sensor: SensorSpec

    @property
    def alive(self) -> bool:
        return self.state.alive

    def with_state(self, **changes) -> Robot:
        return replace(self, state=replace(self.state, **changes))

    def with_pointing(self, alpha: float) -> Robot:
        return replace(self, sensor=replace(self.sensor, pointing=alpha))


def step_kinematics(state: RobotState, desired_heading: float) -> RobotState:
    """Turn toward ``desired_heading`` by at most ``turn_rate``, then advance ``speed``."""
    if not state.alive:
        return state
    diff = wrap_angle(desired_heading - state.heading)
    if math.isinf(state.turn_rate) or abs(diff) <= state.turn_rate:
        heading = wrap_angle(desired_heading)
    else:
        heading = wrap_angle(state.heading + math.copysign(state.turn_rate, diff))
    return replace(
        state,
        x=state.x + state.speed * math.cos(heading),
        y=state.y + state.speed * math.sin(heading),
        heading=heading,
    )
