"""Running single games and seeded batches."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from ..sim import game_step
from .scenario import Scenario
from .trace import Trace, aggregate, record_from_world, summarize, trace_header, write_trace


@dataclass
class RunResult:
    trace: Trace
    summary: dict


def run(scenario: Scenario) -> RunResult:
    """Play the scenario until termination or ``max_steps``."""
    world = scenario.build_world()
    trace = Trace(trace_header(scenario.to_dict()), [record_from_world(world)])
    while not world.terminated and world.step < scenario.max_steps:
        world = game_step(world)
        trace.records.append(record_from_world(world))
    return RunResult(trace, summarize(trace))


def _run_seed(args) -> tuple[int, dict]:
    scenario, seed, out_dir = args
    result = run(scenario.with_overrides(seed=seed))
    if out_dir is not None:
        write_trace(result.trace, Path(out_dir) / f"trace_{seed}.jsonl")
    return seed, result.summary


def batch(scenario: Scenario, n_runs: int, seed_base: int = 0, jobs: int = 1,
          out_dir=None) -> dict:
    """Run seeds ``seed_base .. seed_base + n_runs - 1`` and aggregate.

    With ``jobs > 1`` games run in worker processes. Per-run traces are
    written to ``out_dir`` when given.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    tasks = [(scenario, seed_base + k, out_dir) for k in range(n_runs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            summaries = dict(pool.map(_run_seed, tasks))
    else:
        summaries = dict(map(_run_seed, tasks))
    return aggregate(summaries)


def compare_policies(scenario: Scenario, policies, n_runs: int, seed_base: int = 0,
                     jobs: int = 1) -> dict[str, dict]:
    """Batch aggregates per pursuer policy, same seeds for each."""
    return {p: batch(scenario.with_overrides(policy=p), n_runs, seed_base, jobs)
            for p in policies}
