"""World state and the synchronous game cycle.

One step runs: sense -> executive integration -> decisions and sensor
pointing -> kinematics -> obstacle collisions -> ballistics. Every decision
reads the pre-step state only. Randomness comes from the world's single
generator and is consumed in a fixed order: sensing by observer index then
target index (range noise before bearing noise), then one draw per shot by
shooter index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from ..fusion import CommonFrameObservation
from .ballistics import CAPTURED, MISSED, NO_SHOT, resolve_ballistics
from .executive import Integration, designate_target, executive_integrate
from .model import EVADER, PURSUER, BallisticsSpec, Obstacle, Robot, step_kinematics
from .policies import LOCAL, Decision, ExecutiveOrder, Policy, decide, flee
from .sensing import reading_to_observation, sense, sensor_pointing


@dataclass
class StepInfo:
    decisions: dict[str, Decision] = field(default_factory=dict)
    integrations: dict[str, dict[str, Integration]] = field(default_factory=dict)
    events: list[dict] = field(default_factory=list)
    n_readings: int = 0


@dataclass
class World:
    bounds: tuple[float, float, float, float]
    obstacles: tuple[Obstacle, ...]
    robots: tuple[Robot, ...]
    policies: dict[str, Policy]
    ballistics: BallisticsSpec
    rng: np.random.Generator
    seed: int = 0
    step: int = 0
    tracks: dict[str, dict[str, CommonFrameObservation]] = field(default_factory=dict)
    memory: dict[str, dict[str, CommonFrameObservation]] = field(default_factory=dict)
    last: StepInfo | None = None

    @classmethod
    def create(cls, bounds, obstacles, robots, policies, ballistics, seed: int) -> World:
        robots = tuple(robots)
        ids = [r.id for r in robots]
        if len(set(ids)) != len(ids):
            raise ValueError("robot ids must be unique")
        for r in robots:
            for k, o in enumerate(obstacles):
                if o.contains(r.state.x, r.state.y):
                    raise ValueError(f"robot {r.id!r} starts inside obstacle {k}")
        return cls(tuple(bounds), tuple(obstacles), robots, dict(policies), ballistics,
                   np.random.default_rng(seed), seed)

    def robot(self, rid: str) -> Robot:
        for r in self.robots:
            if r.id == rid:
                return r
        raise KeyError(rid)

    def alive(self, role: str) -> list[Robot]:
        return [r for r in self.robots if r.role == role and r.alive]

    @property
    def terminated(self) -> bool:
        return not self.alive(EVADER) or not self.alive(PURSUER)


def _pursuer_teams(world: World) -> list[str]:
    return sorted({r.team for r in world.robots if r.role == PURSUER})


def game_step(world: World, policies: Mapping[str, Policy] | None = None,
              order: Sequence[int] | None = None) -> World:
    """Advance ``world`` by one synchronous step and return the new world.

    ``order`` permutes the robot processing order for decisions and
    kinematics; the result does not depend on it. The world's random
    generator is advanced in place.
    """
    if world.terminated:
        raise ValueError("game already terminated")
    policies = dict(world.policies if policies is None else policies)
    robots = world.robots
    order = list(range(len(robots))) if order is None else list(order)
    rng = world.rng
    info = StepInfo()

    # sense
    memory = {rid: dict(m) for rid, m in world.memory.items()}
    observed: dict[str, dict[str, CommonFrameObservation]] = {}
    for obs_robot in robots:
        if not obs_robot.alive:
            continue
        for target in robots:
            if target.role == obs_robot.role or not target.alive:
                continue
            reading = sense(obs_robot, target, obs_robot.sensor, rng, world.obstacles, world.step)
            if reading is None or reading.measured_range <= 0.0:
                continue
            info.n_readings += 1
            est = reading_to_observation(reading, obs_robot.state, obs_robot.sensor)
            observed.setdefault(obs_robot.id, {})[target.id] = est
            memory.setdefault(obs_robot.id, {})[target.id] = est

    # executive integration per pursuer team
    tracks = {team: dict(t) for team, t in world.tracks.items()}
    for team in _pursuer_teams(world):
        grouped: dict[str, list] = {}
        for r in robots:
            if r.team == team and r.id in observed:
                for eid, est in observed[r.id].items():
                    grouped.setdefault(eid, []).append((r.id, est))
        results = executive_integrate(grouped, tracks.get(team, {}))
        info.integrations[team] = results
        team_tracks = tracks.setdefault(team, {})
        for eid, res in results.items():
            if res.estimate is not None:
                team_tracks[eid] = res.estimate

    # executive orders, computed once per team from the pre-step state
    orders: dict[str, ExecutiveOrder | None] = {}
    for team in _pursuer_teams(world):
        policy = policies[team]
        members = {r.id: r.state.position for r in robots
                   if r.team == team and r.role == PURSUER and r.alive}
        tid, value = designate_target(members, tracks.get(team, {}), policy.incentive_scale)
        orders[team] = None if tid is None else ExecutiveOrder(
            tid, tuple(tracks[team][tid].position), policy.incentive_weight * value)

    # decisions and kinematics
    new_states = {}
    pointing = {}
    for idx in order:
        r = robots[idx]
        if not r.alive:
            continue
        own = memory.get(r.id, {})
        if r.role == PURSUER:
            policy = policies[r.team]
            local = {eid: tuple(est.position) for eid, est in own.items()}
            d = decide(policy, r, local, orders[r.team], world.obstacles, world.bounds)
            known = own if policy.kind == LOCAL else tracks.get(r.team, {})
            pointing[r.id] = sensor_pointing(r, known)
        else:
            threats = [tuple(est.position) for est in own.values()]
            d = Decision(flee(r, threats, world.obstacles, world.bounds))
        info.decisions[r.id] = d
        new_states[r.id] = step_kinematics(r.state, d.desired_heading)

    moved = []
    for r in robots:
        if r.id in new_states:
            r = replace(r, state=new_states[r.id])
        if r.id in pointing:
            r = r.with_pointing(pointing[r.id])
        moved.append(r)

    # collisions with obstacles destroy the robot
    for k, r in enumerate(moved):
        if not r.alive:
            continue
        for j, o in enumerate(world.obstacles):
            if o.contains(r.state.x, r.state.y):
                moved[k] = r.with_state(alive=False)
                info.events.append({"type": "collision", "robot": r.id, "role": r.role,
                                    "obstacle": j})
                break

    # ballistics, one shot per pursuer, nearest evader in range first
    for k, p in enumerate(moved):
        if p.role != PURSUER or not p.alive:
            continue
        in_range = []
        for j, e in enumerate(moved):
            if e.role == EVADER and e.alive:
                dist = math.hypot(e.state.x - p.state.x, e.state.y - p.state.y)
                if dist <= world.ballistics.capture_radius:
                    in_range.append((dist, j))
        for _, j in sorted(in_range):
            e = moved[j]
            if policies[p.team].kind == LOCAL:
                estimate = observed.get(p.id, {}).get(e.id)
            else:
                res = info.integrations.get(p.team, {}).get(e.id)
                estimate = None if res is None else res.estimate
            outcome = resolve_ballistics(p, e, estimate, world.ballistics, rng)
            if outcome == NO_SHOT:
                continue
            info.events.append({"type": "shot", "shooter": p.id, "target": e.id,
                                "outcome": outcome})
            if outcome == CAPTURED:
                moved[j] = e.with_state(alive=False)
            break

    dead = {r.id for r in moved if not r.alive}
    for team_tracks in tracks.values():
        for rid in dead & set(team_tracks):
            del team_tracks[rid]
    for rid in list(memory):
        if rid in dead:
            del memory[rid]
        else:
            for tid in dead & set(memory[rid]):
                del memory[rid][tid]

    return replace(world, robots=tuple(moved), step=world.step + 1, tracks=tracks,
                   memory=memory, last=info)


__all__ = ["World", "StepInfo", "game_step", "CAPTURED", "MISSED", "NO_SHOT"]
