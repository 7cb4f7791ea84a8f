"""Scenario files: YAML documents describing one pursuit-evasion game.

Schema (version 1)::

    schema_version: 1
    seed: 7                      # required
    max_steps: 500
    world:
      bounds: [xmin, ymin, xmax, ymax]
      obstacles:
        - {center: [x, y], radius: r}
    ballistics: {capture_radius: 2.0, shot_cost: 1.0, miss_penalty: 5.0}
    teams:
      hunters: {role: pursuer, policy: mixed, params: {incentive_scale: 20.0}}
      prey: {role: evader, policy: flee}
    robots:
      - id: P1
        team: hunters
        pose: [x, y, heading]
        speed: 1.0
        turn_rate: 0.25          # radians per step; .inf for instant turns
        sensor: {max_range: 40, cone_half_angle: 0.8, pointing: 0.0,
                 range_noise_sd: 0.3, bearing_noise_sd: 0.02, max_pointing: 1.57}

Policy ``params`` are the fields of :class:`teamfusion.sim.Policy` other
than ``kind``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from ..sim import (
    EVADER,
    PURSUER,
    BallisticsSpec,
    Obstacle,
    Policy,
    Robot,
    RobotState,
    SensorSpec,
    World,
)
from ..sim.policies import FLEE, POLICY_KINDS

SCHEMA_VERSION = 1


class ScenarioError(Exception):
    pass


class ScenarioParseError(ScenarioError):
    pass


class ScenarioValidationError(ScenarioError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class TeamSpec:
    role: str
    policy: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    seed: int
    max_steps: int
    bounds: tuple[float, float, float, float]
    obstacles: tuple[Obstacle, ...]
    ballistics: BallisticsSpec
    teams: dict[str, TeamSpec]
    robots: tuple[Robot, ...]
    schema_version: int = SCHEMA_VERSION

    def with_overrides(self, seed: int | None = None, max_steps: int | None = None,
                       policy: str | None = None) -> Scenario:
        out = self
        if seed is not None:
            out = replace(out, seed=int(seed))
        if max_steps is not None:
            out = replace(out, max_steps=int(max_steps))
        if policy is not None:
            if policy not in POLICY_KINDS:
                raise ScenarioValidationError([f"policy: unknown policy {policy!r}"])
            teams = {name: (replace(t, policy=policy) if t.role == PURSUER else t)
                     for name, t in out.teams.items()}
            out = replace(out, teams=teams)
        return out

    def policies(self) -> dict[str, Policy]:
        return {name: Policy(t.policy, **t.params)
                for name, t in self.teams.items() if t.role == PURSUER}

    def build_world(self) -> World:
        return World.create(self.bounds, self.obstacles, self.robots, self.policies(),
                            self.ballistics, self.seed)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "seed": self.seed,
            "max_steps": self.max_steps,
            "world": {
                "bounds": list(self.bounds),
                "obstacles": [{"center": [o.x, o.y], "radius": o.radius} for o in self.obstacles],
            },
            "ballistics": {
                "capture_radius": self.ballistics.capture_radius,
                "shot_cost": self.ballistics.shot_cost,
                "miss_penalty": self.ballistics.miss_penalty,
            },
            "teams": {name: {"role": t.role, "policy": t.policy, "params": dict(t.params)}
                      for name, t in self.teams.items()},
            "robots": [
                {
                    "id": r.id,
                    "team": r.team,
                    "pose": [r.state.x, r.state.y, r.state.heading],
                    "speed": r.state.speed,
                    "turn_rate": r.state.turn_rate,
                    "sensor": {
                        "max_range": r.sensor.max_range,
                        "cone_half_angle": r.sensor.cone_half_angle,
                        "pointing": r.sensor.pointing,
                        "range_noise_sd": r.sensor.range_noise_sd,
                        "bearing_noise_sd": r.sensor.bearing_noise_sd,
                        "max_pointing": r.sensor.max_pointing,
                    },
                }
                for r in self.robots
            ],
        }


def _num(value, path, errors, *, positive=False, nonneg=False, allow_inf=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append(f"{path}: expected a number, got {value!r}")
        return None
    v = float(value)
    if math.isnan(v) or (math.isinf(v) and not allow_inf):
        errors.append(f"{path}: must be finite")
        return None
    if positive and not v > 0:
        errors.append(f"{path}: must be positive")
        return None
    if nonneg and v < 0:
        errors.append(f"{path}: must be nonnegative")
        return None
    return v


def _vec(value, n, path, errors):
    if not isinstance(value, (list, tuple)) or len(value) != n:
        errors.append(f"{path}: expected a list of {n} numbers")
        return None
    out = [_num(v, f"{path}[{k}]", errors) for k, v in enumerate(value)]
    return None if any(v is None for v in out) else out


_SENSOR_KEYS = {"max_range", "cone_half_angle", "pointing", "range_noise_sd",
                "bearing_noise_sd", "max_pointing"}
_POLICY_PARAMS = {"incentive_scale", "incentive_weight", "avoidance_gain", "avoidance_horizon"}


def parse_scenario(doc) -> Scenario:
    """Validate a parsed document and build a :class:`Scenario`.

    All problems are collected and reported together with their field paths.
    """
    errors: list[str] = []
    if not isinstance(doc, dict):
        raise ScenarioValidationError(["<root>: expected a mapping"])

    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        errors.append(f"schema_version: unsupported version {version!r}")

    seed = doc.get("seed")
    if seed is None:
        errors.append("seed: seed required")
    elif isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        errors.append("seed: must be a nonnegative integer")

    max_steps = doc.get("max_steps", 500)
    if isinstance(max_steps, bool) or not isinstance(max_steps, int) or max_steps < 0:
        errors.append("max_steps: must be a nonnegative integer")

    world = doc.get("world") or {}
    bounds = _vec(world.get("bounds"), 4, "world.bounds", errors)
    if bounds and not (bounds[0] < bounds[2] and bounds[1] < bounds[3]):
        errors.append("world.bounds: need xmin < xmax and ymin < ymax")
        bounds = None
    obstacles = []
    for k, o in enumerate(world.get("obstacles") or []):
        path = f"world.obstacles[{k}]"
        if not isinstance(o, dict):
            errors.append(f"{path}: expected a mapping")
            continue
        c = _vec(o.get("center"), 2, f"{path}.center", errors)
        r = _num(o.get("radius"), f"{path}.radius", errors, positive=True)
        if c is not None and r is not None:
            obstacles.append(Obstacle(c[0], c[1], r))

    bal = doc.get("ballistics") or {}
    cap = _num(bal.get("capture_radius"), "ballistics.capture_radius", errors, positive=True)
    shot_cost = _num(bal.get("shot_cost", 0.0), "ballistics.shot_cost", errors, nonneg=True)
    miss_penalty = _num(bal.get("miss_penalty", 0.0), "ballistics.miss_penalty", errors,
                        nonneg=True)
    ballistics = None
    if None not in (cap, shot_cost, miss_penalty):
        ballistics = BallisticsSpec(cap, shot_cost, miss_penalty)

    teams: dict[str, TeamSpec] = {}
    raw_teams = doc.get("teams")
    if not isinstance(raw_teams, dict) or not raw_teams:
        errors.append("teams: expected a non-empty mapping")
        raw_teams = {}
    for name, t in raw_teams.items():
        path = f"teams.{name}"
        if not isinstance(t, dict):
            errors.append(f"{path}: expected a mapping")
            continue
        role = t.get("role")
        if role not in (PURSUER, EVADER):
            errors.append(f"{path}.role: must be {PURSUER!r} or {EVADER!r}")
            continue
        params = t.get("params") or {}
        if role == PURSUER:
            policy = t.get("policy")
            if policy not in POLICY_KINDS:
                errors.append(f"{path}.policy: must be one of {', '.join(POLICY_KINDS)}")
                continue
            bad = set(params) - _POLICY_PARAMS
            if bad:
                errors.append(f"{path}.params: unknown keys {sorted(bad)}")
                continue
            try:
                Policy(policy, **params)
            except (TypeError, ValueError) as exc:
                errors.append(f"{path}.params: {exc}")
                continue
        else:
            policy = t.get("policy", FLEE)
            if policy != FLEE:
                errors.append(f"{path}.policy: evader teams support only {FLEE!r}")
                continue
        teams[str(name)] = TeamSpec(role, policy, dict(params))

    robots = []
    raw_robots = doc.get("robots")
    if not isinstance(raw_robots, list):
        errors.append("robots: expected a list")
        raw_robots = []
    seen_ids = set()
    for k, r in enumerate(raw_robots):
        path = f"robots[{k}]"
        if not isinstance(r, dict):
            errors.append(f"{path}: expected a mapping")
            continue
        rid = r.get("id")
        if not isinstance(rid, str) or not rid:
            errors.append(f"{path}.id: expected a non-empty string")
            continue
        label = f"{path} ({rid!r})"
        if rid in seen_ids:
            errors.append(f"{label}.id: duplicate robot id")
        seen_ids.add(rid)
        team = r.get("team")
        if team not in raw_teams:
            errors.append(f"{label}.team: unknown team {team!r}")
            continue
        pose = _vec(r.get("pose"), 3, f"{label}.pose", errors)
        speed = _num(r.get("speed"), f"{label}.speed", errors, positive=True)
        turn = _num(r.get("turn_rate", math.inf), f"{label}.turn_rate", errors,
                    positive=True, allow_inf=True)
        sensor_doc = r.get("sensor")
        sensor = None
        if not isinstance(sensor_doc, dict):
            errors.append(f"{label}.sensor: expected a mapping")
        else:
            bad = set(sensor_doc) - _SENSOR_KEYS
            if bad:
                errors.append(f"{label}.sensor: unknown keys {sorted(bad)}")
            else:
                vals = {key: _num(v, f"{label}.sensor.{key}", errors)
                        for key, v in sensor_doc.items()}
                if None not in vals.values():
                    try:
                        sensor = SensorSpec(**vals)
                    except (TypeError, ValueError) as exc:
                        errors.append(f"{label}.sensor: {exc}")
        if pose is None or speed is None or turn is None or sensor is None:
            continue
        if bounds and not (bounds[0] <= pose[0] <= bounds[2] and bounds[1] <= pose[1] <= bounds[3]):
            errors.append(f"{label}.pose: robot {rid!r} starts outside world.bounds")
        for j, o in enumerate(obstacles):
            if o.contains(pose[0], pose[1]):
                errors.append(f"{label}.pose: robot {rid!r} starts inside world.obstacles[{j}]")
        if team not in teams:
            continue
        robots.append(Robot(rid, teams[team].role, team,
                            RobotState(pose[0], pose[1], pose[2], speed, turn), sensor))

    if errors:
        raise ScenarioValidationError(errors)
    return Scenario(seed, max_steps, tuple(bounds), tuple(obstacles), ballistics, teams,
                    tuple(robots), version)


def load_scenario(path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioParseError(f"cannot parse {path}: {exc}") from exc
    return parse_scenario(doc)


def dump_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(yaml.safe_dump(scenario.to_dict(), sort_keys=False))
