"""Trace and plot-data files.

Both are JSON lines. The first line is a header naming the schema and its
version.

Trace (``teamfusion.trace`` v1): the header carries the full scenario; each
following line is one step record, starting with the initial state at step
0, so a game of ``k`` steps has ``k + 1`` records::

    {"step": 3, "terminated": false, "events": [...],
     "robots": [{"id": "P1", "team": "hunters", "role": "pursuer",
                 "x": .., "y": .., "heading": .., "alive": true,
                 "pointing": .., "desired_heading": .., "target": "E1",
                 "agree": true}, ...],
     "estimates": {"hunters": {"E1": {"mean": [x, y], "covariance": [[..], [..]],
                                      "used": ["P1"], "excluded": [],
                                      "coalitions": [["P1"]]}}}}

``agree`` is null for robots without an executive order (evaders, local
policy). Events are ``{"type": "shot", "shooter", "target", "outcome"}`` and
``{"type": "collision", "robot", "role", "obstacle"}``.

Plot data (``teamfusion.plot`` v1): the header lists ``columns``; every
following line is a JSON array of numbers in that order.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path

from ..pools import RiskCurve
from ..sim import CAPTURED, EVADER, MISSED, PURSUER, World

TRACE_SCHEMA = "teamfusion.trace"
PLOT_SCHEMA = "teamfusion.plot"
FORMAT_VERSION = 1


@dataclass
class Trace:
    header: dict
    records: list[dict] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return self.records[-1]["step"] if self.records else 0


def trace_header(scenario_dict: dict) -> dict:
    return {"schema": TRACE_SCHEMA, "version": FORMAT_VERSION, "scenario": scenario_dict}


def _matrix(m) -> list:
    return [[float(v) for v in row] for row in m]


def record_from_world(world: World) -> dict:
    """Step record for ``world`` (decisions and estimates from its last step)."""
    last = world.last
    decisions = last.decisions if last else {}
    robots = []
    for r in world.robots:
        d = decisions.get(r.id)
        robots.append({
            "id": r.id,
            "team": r.team,
            "role": r.role,
            "x": r.state.x,
            "y": r.state.y,
            "heading": r.state.heading,
            "alive": r.alive,
            "pointing": r.sensor.pointing,
            "desired_heading": None if d is None else d.desired_heading,
            "target": None if d is None else d.target_id,
            "agree": None if d is None else d.agree,
        })
    estimates = {}
    for team, results in sorted((last.integrations if last else {}).items()):
        team_est = {}
        for eid, res in sorted(results.items()):
            if res.estimate is None:
                continue
            team_est[eid] = {
                "mean": [float(v) for v in res.estimate.position],
                "covariance": _matrix(res.estimate.covariance),
                "used": list(res.used),
                "excluded": list(res.excluded),
                "coalitions": [list(c) for c in res.coalitions],
            }
        estimates[team] = team_est
    return {
        "step": world.step,
        "terminated": world.terminated,
        "events": [dict(e) for e in (last.events if last else [])],
        "robots": robots,
        "estimates": estimates,
    }


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_trace(trace: Trace, path) -> None:
    with open(path, "w") as fh:
        fh.write(_dumps(trace.header) + "\n")
        for rec in trace.records:
            fh.write(_dumps(rec) + "\n")


def _read_lines(path) -> list:
    out = []
    lines = Path(path).read_text().splitlines()
    for k, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError:
            if k == len(lines) - 1:
                break   # truncated final line of an interrupted run
            raise
    return out


def read_trace(path) -> Trace:
    items = _read_lines(path)
    if not items or items[0].get("schema") != TRACE_SCHEMA:
        raise ValueError(f"{path}: not a {TRACE_SCHEMA} file")
    if items[0].get("version") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported trace version {items[0].get('version')!r}")
    return Trace(items[0], items[1:])


def read_plot_data(path) -> tuple[dict, list[list[float]]]:
    items = _read_lines(path)
    if not items or not isinstance(items[0], dict) or items[0].get("schema") != PLOT_SCHEMA:
        raise ValueError(f"{path}: not a {PLOT_SCHEMA} file")
    return items[0], items[1:]


def emit_plot_data(data: Trace | RiskCurve, path) -> None:
    """Write a risk curve as plot data, or a trace in trace format."""
    if isinstance(data, Trace):
        write_trace(data, path)
        return
    if not isinstance(data, RiskCurve):
        raise TypeError(f"cannot emit plot data for {type(data).__name__}")
    header = {"schema": PLOT_SCHEMA, "version": FORMAT_VERSION, "kind": "risk_curve",
              "columns": ["theta", "u_i", "u_j"]}
    with open(path, "w") as fh:
        fh.write(_dumps(header) + "\n")
        for theta, (ui, uj) in zip(data.thetas, data.samples):
            fh.write(_dumps([float(theta), float(ui), float(uj)]) + "\n")


def _capture_stats(steps: list[int]) -> tuple[float | None, float | None]:
    if not steps:
        return None, None
    steps = sorted(steps)
    return math.fsum(steps) / len(steps), statistics.pstdev(steps)


def _ratio(num, den):
    return num / den if den else None


def summarize(trace: Trace) -> dict:
    """Per-run statistics derived from the step records alone."""
    first = trace.records[0] if trace.records else {"robots": []}
    pursuers = sorted(r["id"] for r in first["robots"] if r["role"] == PURSUER)
    evaders = sorted(r["id"] for r in first["robots"] if r["role"] == EVADER)
    captures: dict[str, int] = {}
    shots = misses = 0
    collisions = {PURSUER: 0, EVADER: 0}
    disagree = dict.fromkeys(pursuers, 0)
    decided = dict.fromkeys(pursuers, 0)
    for rec in trace.records:
        for ev in rec["events"]:
            if ev["type"] == "shot":
                shots += 1
                if ev["outcome"] == MISSED:
                    misses += 1
                elif ev["outcome"] == CAPTURED:
                    captures[ev["target"]] = rec["step"]
            elif ev["type"] == "collision":
                collisions[ev["role"]] += 1
        for r in rec["robots"]:
            if r["role"] == PURSUER and r["agree"] is not None:
                decided[r["id"]] += 1
                if not r["agree"]:
                    disagree[r["id"]] += 1
    bal = trace.header.get("scenario", {}).get("ballistics", {})
    cost = shots * bal.get("shot_cost", 0.0) + misses * bal.get("miss_penalty", 0.0)
    capture_steps = sorted(captures.values())
    mean_c, sd_c = _capture_stats(capture_steps)
    total_disagree, total_decided = sum(disagree.values()), sum(decided.values())
    return {
        "steps": trace.steps,
        "terminated": bool(trace.records and trace.records[-1]["terminated"]),
        "evaders": len(evaders),
        "captures": dict(sorted(captures.items())),
        "capture_steps": capture_steps,
        "mean_steps_to_capture": mean_c,
        "sd_steps_to_capture": sd_c,
        "shots": shots,
        "misses": misses,
        "miss_rate": _ratio(misses, shots),
        "collisions": collisions[PURSUER] + collisions[EVADER],
        "pursuer_collisions": collisions[PURSUER],
        "evader_collisions": collisions[EVADER],
        "disagree_steps": disagree,
        "decision_steps": decided,
        "disagreement_rate": _ratio(total_disagree, total_decided),
        "cost": cost,
    }


AGGREGATE_KEYS = ("mean_steps_to_capture", "sd_steps_to_capture", "shots", "misses",
                  "miss_rate", "collisions", "pursuer_collisions", "evader_collisions",
                  "disagreement_rate", "cost")


def aggregate(summaries: dict[int, dict]) -> dict:
    """Combine per-seed summaries; the result does not depend on run order."""
    seeds = sorted(summaries)
    runs = [summaries[s] for s in seeds]
    capture_steps = sorted(c for r in runs for c in r["capture_steps"])
    mean_c, sd_c = _capture_stats(capture_steps)
    shots = sum(r["shots"] for r in runs)
    misses = sum(r["misses"] for r in runs)
    disagree = sum(sum(r["disagree_steps"].values()) for r in runs)
    decided = sum(sum(r["decision_steps"].values()) for r in runs)
    evaders = sum(r["evaders"] for r in runs)
    return {
        "n_runs": len(runs),
        "seeds": seeds,
        "captured": len(capture_steps),
        "capture_rate": _ratio(len(capture_steps), evaders),
        "mean_steps_to_capture": mean_c,
        "sd_steps_to_capture": sd_c,
        "shots": shots,
        "misses": misses,
        "miss_rate": _ratio(misses, shots),
        "collisions": sum(r["collisions"] for r in runs),
        "pursuer_collisions": sum(r["pursuer_collisions"] for r in runs),
        "evader_collisions": sum(r["evader_collisions"] for r in runs),
        "disagreement_rate": _ratio(disagree, decided),
        "cost": math.fsum(r["cost"] for r in runs),
    }
