"""Pursuit-evasion team game."""

from .ballistics import CAPTURED, MISSED, NO_SHOT, resolve_ballistics
from .executive import Integration, designate_target, executive_integrate
from .game import StepInfo, World, game_step
from .model import (
    EVADER,
    PURSUER,
    BallisticsSpec,
    Obstacle,
    Robot,
    RobotState,
    SensorReading,
    SensorSpec,
    step_kinematics,
    wrap_angle,
)
from .policies import GLOBAL, LOCAL, MIXED, Decision, ExecutiveOrder, Policy, decide, flee
from .sensing import reading_to_observation, sense, sensor_pointing

__all__ = [
    "CAPTURED", "MISSED", "NO_SHOT", "resolve_ballistics",
    "Integration", "designate_target", "executive_integrate",
    "StepInfo", "World", "game_step",
    "EVADER", "PURSUER", "BallisticsSpec", "Obstacle", "Robot", "RobotState",
    "SensorReading", "SensorSpec", "step_kinematics", "wrap_angle",
    "GLOBAL", "LOCAL", "MIXED", "Decision", "ExecutiveOrder", "Policy", "decide", "flee",
    "reading_to_observation", "sense", "sensor_pointing",
]
