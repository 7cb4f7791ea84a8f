import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from teamfusion.fusion import CommonFrameObservation
from teamfusion.gaussian import SingularJacobianError
from teamfusion.sim import (
    CAPTURED,
    EVADER,
    GLOBAL,
    LOCAL,
    MISSED,
    MIXED,
    NO_SHOT,
    PURSUER,
    BallisticsSpec,
    ExecutiveOrder,
    Obstacle,
    Policy,
    Robot,
    RobotState,
    SensorReading,
    SensorSpec,
    World,
    decide,
    executive_integrate,
    flee,
    game_step,
    reading_to_observation,
    resolve_ballistics,
    sense,
    sensor_pointing,
    step_kinematics,
    wrap_angle,
)
from teamfusion.sim.policies import obstacle_term
from teamfusion.sim.sensing import information_gain

WIDE = SensorSpec(max_range=100.0, cone_half_angle=math.pi)


def robot(rid, x, y, heading=0.0, role=PURSUER, team=None, speed=1.0, turn=math.inf,
          sensor=WIDE):
    team = team or ("hunters" if role == PURSUER else "prey")
    return Robot(rid, role, team, RobotState(x, y, heading, speed, turn), sensor)


def cfo(x, y, var=1.0):
    return CommonFrameObservation([x, y], np.eye(2) / var)


class TestKinematics:
    def test_clamped_turn(self):
        s = step_kinematics(RobotState(0, 0, 0, 1, 0.1), math.pi / 2)
        assert s.heading == 0.1

    def test_instant_turn(self):
        s = step_kinematics(RobotState(0, 0, 0, 1), math.pi / 2)
        assert s.heading == math.pi / 2

    def test_straight(self):
        s = step_kinematics(RobotState(0, 0, 0, 1, 0.2), 0.0)
        assert (s.x, s.y) == (1.0, 0.0)

    def test_shortest_direction(self):
        s = step_kinematics(RobotState(0, 0, 3.0, 1, 0.1), -3.0)
        assert s.heading == pytest.approx(wrap_angle(3.1))

    @given(st.floats(-math.pi, math.pi), st.floats(-10, 10), st.floats(0.01, 3), st.floats(0.1, 5))
    def test_turn_and_displacement_limits(self, h0, desired, omega, speed):
        s0 = RobotState(1.0, 2.0, h0, speed, omega)
        s1 = step_kinematics(s0, desired)
        assert abs(wrap_angle(s1.heading - s0.heading)) <= omega + 1e-12
        assert math.hypot(s1.x - s0.x, s1.y - s0.y) == pytest.approx(speed, rel=1e-12)
        assert -math.pi < s1.heading <= math.pi

    def test_validation(self):
        with pytest.raises(ValueError):
            RobotState(0, 0, 0, 0.0)
        with pytest.raises(ValueError):
            RobotState(0, 0, 0, 1.0, 0.0)


class TestSense:
    def test_dead_ahead_noiseless(self):
        spec = SensorSpec(20.0, 0.5)
        r = sense(robot("P", 0, 0, sensor=spec), robot("E", 10, 0, role=EVADER), spec,
                  np.random.default_rng(0))
        assert r.measured_range == 10.0 and r.measured_bearing == 0.0

    def test_behind_not_seen(self):
        spec = SensorSpec(20.0, math.pi / 4)
        assert sense(robot("P", 0, 0, sensor=spec), robot("E", -5, 0, role=EVADER)) is None

    def test_out_of_range(self):
        spec = SensorSpec(5.0, math.pi)
        assert sense(robot("P", 0, 0, sensor=spec), robot("E", 6, 0, role=EVADER)) is None

    def test_pointing_moves_cone(self):
        spec = SensorSpec(20.0, 0.3, pointing=math.pi / 2)
        p = robot("P", 0, 0, sensor=spec)
        assert sense(p, robot("E", 0, 5, role=EVADER)) is not None
        assert sense(p, robot("E", 5, 0, role=EVADER)) is None

    def test_occluded(self):
        p, e = robot("P", 0, 0), robot("E", 10, 0, role=EVADER)
        assert sense(p, e, obstacles=[Obstacle(5, 0, 1)]) is None
        assert sense(p, e, obstacles=[Obstacle(5, 3, 1)]) is not None

    def test_seeded_noise_reproducible(self):
        spec = SensorSpec(20.0, math.pi, range_noise_sd=0.1, bearing_noise_sd=0.01)
        p, e = robot("P", 0, 0, sensor=spec), robot("E", 3, 4, role=EVADER)
        a = sense(p, e, spec, np.random.default_rng(5))
        b = sense(p, e, spec, np.random.default_rng(5))
        c = sense(p, e, spec, np.random.default_rng(6))
        assert a == b and a != c

    def test_dead_robots_invisible(self):
        e = robot("E", 3, 0, role=EVADER).with_state(alive=False)
        assert sense(robot("P", 0, 0), e) is None


class TestReadingToObservation:
    def test_mean_dead_ahead(self):
        spec = SensorSpec(50, 1, range_noise_sd=1e-3, bearing_noise_sd=1e-4)
        obs = reading_to_observation(SensorReading("P", "E", 7.0, 0.0, 0),
                                     RobotState(0, 0, 0, 1), spec)
        np.testing.assert_allclose(obs.position, [7.0, 0.0], atol=1e-12)

    def test_frame_consistency_under_rotation(self):
        spec = SensorSpec(50, math.pi, range_noise_sd=0.1, bearing_noise_sd=0.01)
        target = robot("E", 4, 6, role=EVADER)
        for heading in np.linspace(-3, 3, 7):
            p = robot("P", 1, 1, heading)
            r = sense(p, target, spec)
            obs = reading_to_observation(r, p.state, spec)
            np.testing.assert_allclose(obs.position, [4, 6], atol=1e-12)

    def test_zero_range_rejected(self):
        with pytest.raises(SingularJacobianError):
            reading_to_observation(SensorReading("P", "E", 0.0, 0.0, 0), RobotState(0, 0, 0, 1),
                                   SensorSpec(10, 1, range_noise_sd=0.1, bearing_noise_sd=0.1))

    def test_monte_carlo_covariance(self):
        rng = np.random.default_rng(3)
        spec = SensorSpec(100, math.pi, range_noise_sd=0.3, bearing_noise_sd=0.02)
        pose = RobotState(2.0, -1.0, 0.4, 1.0)
        r, b = 20.0, 0.3
        obs = reading_to_observation(SensorReading("P", "E", r, b, 0), pose, spec)
        rs = r + rng.normal(0, 0.3, 20000)
        bs = b + rng.normal(0, 0.02, 20000)
        pts = np.column_stack([pose.x + rs * np.cos(pose.heading + bs),
                               pose.y + rs * np.sin(pose.heading + bs)])
        ev_mc = np.linalg.eigvalsh(np.cov(pts.T))
        ev = np.linalg.eigvalsh(obs.covariance)
        np.testing.assert_allclose(ev, ev_mc, rtol=0.05)


class TestExecutive:
    def test_single_reading(self):
        o = cfo(1, 2)
        res = executive_integrate({"E": [("P1", o)]})["E"]
        np.testing.assert_array_equal(res.estimate.position, o.position)
        np.testing.assert_array_equal(res.estimate.information, o.information)

    def test_two_agreeing(self):
        res = executive_integrate({"E": [("P1", cfo(0, 0)), ("P2", cfo(1, 1))]})["E"]
        np.testing.assert_allclose(res.estimate.position, [0.5, 0.5])
        np.testing.assert_allclose(res.estimate.information, 2 * np.eye(2))
        assert res.used == ("P1", "P2") and res.excluded == ()

    def test_outlier_excluded(self):
        readings = {"E": [("P1", cfo(0, 0)), ("P2", cfo(1, 0)), ("P3", cfo(20, 0))]}
        res = executive_integrate(readings)["E"]
        np.testing.assert_allclose(res.estimate.position, [0.5, 0.0])
        assert res.used == ("P1", "P2") and res.excluded == ("P3",)

    def test_prior_only_has_no_estimate(self):
        res = executive_integrate({}, {"E": cfo(0, 0)})["E"]
        assert res.estimate is None and res.prior is not None


class TestDecide:
    bounds = (-100, -100, 100, 100)

    def test_local_dead_ahead(self):
        d = decide(Policy(LOCAL), robot("P", 0, 0), {"E": (10, 0)}, None, [], self.bounds)
        assert d.desired_heading == 0.0 and d.target_id == "E" and d.agree is None

    def test_local_nearest(self):
        d = decide(Policy(LOCAL), robot("P", 0, 0), {"A": (10, 0), "B": (0, 5)}, None, [],
                   self.bounds)
        assert d.target_id == "B" and d.desired_heading == pytest.approx(math.pi / 2)

    def test_global_ignores_obstacles(self):
        order = ExecutiveOrder("E", (10.0, 0.0), 0.1)
        d = decide(Policy(GLOBAL), robot("P", 0, 0), {}, order, [Obstacle(2, 0, 1)], self.bounds)
        assert d.desired_heading == 0.0 and d.agree

    def test_mixed_flips_with_obstacle(self):
        order = ExecutiveOrder("E", (10.0, 0.0), 0.5)
        p = robot("P", 0, 0)
        blocked = decide(Policy(MIXED), p, {}, order, [Obstacle(2.5, 0.1, 1.0)], self.bounds)
        clear = decide(Policy(MIXED), p, {}, order, [], self.bounds)
        assert not blocked.agree and blocked.desired_heading != 0.0
        assert clear.agree and clear.desired_heading == 0.0

    @given(st.floats(0, 3), st.floats(1.5, 6), st.floats(-2, 2))
    def test_mixed_flag_matches_utilities(self, incentive, ox, oy):
        obstacles = [Obstacle(ox, oy, 1.0)]
        if obstacles[0].contains(0, 0):
            return
        order = ExecutiveOrder("E", (10.0, 0.0), incentive)
        d = decide(Policy(MIXED), robot("P", 0, 0), {}, order, obstacles, self.bounds)
        _, u = obstacle_term(0, 0, 0.0, obstacles, 1.0, 2.0)
        assert d.obstacle_utility == u
        assert d.agree == (incentive >= u)

    def test_no_evader_holds_heading(self):
        d = decide(Policy(LOCAL), robot("P", 0, 0, 1.0), {}, None, [], self.bounds)
        assert d.desired_heading == 1.0

    def test_deflection_capped(self):
        defl, _ = obstacle_term(0, 0, 0, [Obstacle(1.01, 0.001, 1.0)], 100.0, 2.0)
        assert abs(defl) == pytest.approx(math.pi / 2)

    def test_policy_validation(self):
        with pytest.raises(ValueError):
            Policy("telepathy")


class TestFlee:
    def test_runs_away(self):
        h = flee(robot("E", 0, 0, role=EVADER), [(-5.0, 0.0)], [], (-50, -50, 50, 50))
        assert h == pytest.approx(0.0)

    def test_stays_in_bounds(self):
        h = flee(robot("E", 9.8, 0, role=EVADER), [(5.0, 0.0)], [], (-10, -10, 10, 10))
        assert 9.8 + math.cos(h) <= 9.5 + 1e-9


class TestSensorPointing:
    def test_single_evader(self):
        p = robot("P", 0, 0, 0.0, sensor=SensorSpec(50, 0.3, range_noise_sd=0.1,
                                                    bearing_noise_sd=0.01, max_pointing=1.5))
        alpha = sensor_pointing(p, {"E": cfo(3, 3)})
        assert alpha == pytest.approx(math.pi / 4)

    def test_prefers_poorly_localized(self):
        spec = SensorSpec(50, 0.3, range_noise_sd=0.1, bearing_noise_sd=0.01, max_pointing=1.5)
        p = robot("P", 0, 0, 0.0, sensor=spec)
        sharp = CommonFrameObservation([10, 5], np.eye(2) * 100)
        vague = CommonFrameObservation([10, -5], np.diag([1e-6, 1e-6]))
        # hand computation: the gain only depends on the prior through its eigenvalues
        added = np.diag([1 / 0.1 ** 2, 1 / (0.01 * math.hypot(10, 5)) ** 2])
        g_sharp = 0.5 * math.log(np.linalg.det(np.eye(2) * 100 + added) / 1e4)
        g_vague = 0.5 * math.log(np.linalg.det(np.eye(2) * 1e-6 + added) / 1e-12)
        assert g_vague > g_sharp
        assert sensor_pointing(p, {"A": sharp, "B": vague}) == pytest.approx(math.atan2(-5, 10))

    def test_clamps_when_out_of_reach(self):
        spec = SensorSpec(50, 0.2, max_pointing=0.5)
        p = robot("P", 0, 0, 0.0, sensor=spec)
        assert sensor_pointing(p, {"E": cfo(-5, 1)}) == 0.5

    def test_no_estimates_keeps_pointing(self):
        p = robot("P", 0, 0, sensor=SensorSpec(50, 0.2, pointing=0.3))
        assert sensor_pointing(p, {}) == 0.3

    def test_information_gain_singular_prior(self):
        assert information_gain(np.zeros((2, 2)), np.eye(2)) == math.inf


class TestBallistics:
    spec = BallisticsSpec(2.0, 1.0, 5.0)

    def test_out_of_range(self):
        out = resolve_ballistics(robot("P", 0, 0), robot("E", 3, 0, role=EVADER), np.zeros((2, 2)),
                                 self.spec, np.random.default_rng(0))
        assert out == NO_SHOT

    def test_perfect_estimate_captures(self):
        for seed in range(20):
            out = resolve_ballistics(robot("P", 0, 0), robot("E", 1, 0, role=EVADER),
                                     np.zeros((2, 2)), self.spec, np.random.default_rng(seed))
            assert out == CAPTURED

    def test_seeded_outcome_repeats(self):
        cov = np.eye(2) * 3.0
        outs = {resolve_ballistics(robot("P", 0, 0), robot("E", 1, 0, role=EVADER), cov,
                                   self.spec, np.random.default_rng(9)) for _ in range(5)}
        assert len(outs) == 1

    def test_hit_probability_decreasing(self):
        ps = [self.spec.hit_probability(t) for t in (0, 0.5, 1, 4, 10)]
        assert ps[0] == 1.0 and all(a > b for a, b in zip(ps, ps[1:]))

    def test_miss_frequency(self):
        cov = np.eye(2) * 2.0  # trace 4 == r^2, so p = 1/e
        rng = np.random.default_rng(1)
        outs = [resolve_ballistics(robot("P", 0, 0), robot("E", 1, 0, role=EVADER), cov,
                                   self.spec, rng) for _ in range(4000)]
        assert outs.count(MISSED) / 4000 == pytest.approx(1 - math.exp(-1), abs=0.03)

    def test_no_estimate_no_shot(self):
        out = resolve_ballistics(robot("P", 0, 0), robot("E", 1, 0, role=EVADER), None,
                                 self.spec, np.random.default_rng(0))
        assert out == NO_SHOT


def world(robots, obstacles=(), policy=LOCAL, seed=0, capture=1.5, bounds=(-50, -50, 50, 50)):
    teams = {r.team for r in robots if r.role == PURSUER}
    return World.create(bounds, obstacles, robots, {t: Policy(policy) for t in teams},
                        BallisticsSpec(capture, 1.0, 5.0), seed)


def noisy(x, y, heading=0.0, role=PURSUER, rid="P", speed=1.0, turn=0.3):
    spec = SensorSpec(60, math.pi, range_noise_sd=0.3, bearing_noise_sd=0.02)
    return robot(rid, x, y, heading, role=role, speed=speed, turn=turn, sensor=spec)


def snapshot(w):
    return [(r.id, r.state, r.sensor.pointing) for r in w.robots]


class TestGameStep:
    def test_zero_evaders_terminal(self):
        w = world([robot("P", 0, 0)])
        assert w.terminated
        with pytest.raises(ValueError):
            game_step(w)

    def test_capture_at_step_one(self):
        e = robot("E", 1.0, 0, role=EVADER, speed=1e-9,
                  sensor=SensorSpec(0.001, 0.01))  # blind and nearly still
        w = game_step(world([robot("P", 0, 0, speed=0.1), e]))
        assert w.step == 1 and w.terminated
        assert w.last.events == [{"type": "shot", "shooter": "P", "target": "E",
                                  "outcome": CAPTURED}]

    def test_start_inside_obstacle_rejected(self):
        with pytest.raises(ValueError):
            world([robot("P", 0, 0), robot("E", 10, 0, role=EVADER)], [Obstacle(0, 0, 1)])

    def test_order_does_not_matter(self):
        robots = [noisy(0, 0, rid="P1"), noisy(5, -5, rid="P2"),
                  noisy(20, 10, role=EVADER, rid="E1"), noisy(-20, 15, role=EVADER, rid="E2")]
        for policy in (LOCAL, GLOBAL, MIXED):
            a = world(robots, [Obstacle(10, 0, 2)], policy, seed=3)
            b = world(robots, [Obstacle(10, 0, 2)], policy, seed=3)
            for _ in range(15):
                if a.terminated:
                    break
                a = game_step(a)
                b = game_step(b, order=[3, 1, 0, 2])
                assert snapshot(a) == snapshot(b)

    def test_noiseless_integration_exact(self):
        spec = SensorSpec(60, math.pi)
        robots = [robot("P1", 0, 0, sensor=spec), robot("P2", 0, 10, sensor=spec),
                  robot("E1", 20, 5, role=EVADER, sensor=spec)]
        w = world(robots, policy=GLOBAL)
        pre = w.robot("E1").state
        w = game_step(w)
        est = w.last.integrations["hunters"]["E1"].estimate
        np.testing.assert_allclose(est.position, [pre.x, pre.y], atol=1e-9)

    def test_heading_and_speed_contract(self):
        robots = [noisy(0, 0, rid="P1"), noisy(-5, 3, rid="P2"),
                  noisy(15, 10, role=EVADER, rid="E1", turn=math.inf, speed=0.7)]
        w = world(robots, [Obstacle(7, 5, 2)], MIXED, seed=4)
        while not w.terminated and w.step < 80:
            before = {r.id: r for r in w.robots}
            w = game_step(w)
            for r in w.robots:
                b = before[r.id]
                if not b.alive:
                    assert r.state == b.state  # dead robots do not move
                    continue
                assert abs(wrap_angle(r.state.heading - b.state.heading)) <= b.state.turn_rate
                moved = math.hypot(r.state.x - b.state.x, r.state.y - b.state.y)
                assert moved == pytest.approx(b.state.speed, rel=1e-12)

    def test_collision_kills(self):
        p = robot("P", 0, 0, speed=1.0)
        e = robot("E", 40, 0, role=EVADER, sensor=SensorSpec(0.001, 0.01), speed=1e-9)
        w = world([p, e], [Obstacle(2.2, 0, 1.0)], GLOBAL)
        for _ in range(3):
            if w.terminated:
                break
            w = game_step(w)
        assert not w.robot("P").alive
        assert {"type": "collision", "robot": "P", "role": PURSUER, "obstacle": 0} in w.last.events

    def test_dead_robots_inert(self):
        dead = robot("P2", 1, 1).with_state(alive=False)
        w = world([robot("P1", 0, 0), dead, robot("E", 10, 0, role=EVADER)], seed=2)
        w = game_step(w)
        assert w.robot("P2").state == dead.state
        assert "P2" not in w.last.decisions
        assert all(ev.get("shooter") != "P2" for ev in w.last.events)

    def test_seed_determinism(self):
        robots = [noisy(0, 0, rid="P1"), noisy(20, 10, role=EVADER, rid="E1", turn=math.inf)]
        runs = []
        for seed in (7, 7, 8):
            w = world(robots, seed=seed)
            for _ in range(10):
                w = game_step(w)
            runs.append(snapshot(w))
        assert runs[0] == runs[1] and runs[0] != runs[2]
