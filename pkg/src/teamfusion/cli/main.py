"""Command-line entry point.

Exit codes: 0 success, 2 usage error, 3 scenario parse error,
4 scenario validation error, 5 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..gaussian import GaussianObservation
from ..pools import curve_convexity_test, risk_curve
from ..fusion import CommonFrameObservation, mahalanobis_sq
from ..sim.policies import POLICY_KINDS
from .runner import compare_policies, run
from .scenario import ScenarioParseError, ScenarioValidationError, load_scenario, parse_scenario
from .trace import emit_plot_data, read_trace, write_trace

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_RUNTIME = 5


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _scenario(args):
    sc = load_scenario(args.scenario)
    return sc.with_overrides(seed=args.seed, max_steps=args.max_steps,
                             policy=getattr(args, "policy", None))


def cmd_run(args) -> int:
    result = run(_scenario(args))
    if args.out:
        out = _out_dir(args.out)
        write_trace(result.trace, out / "trace.jsonl")
        (out / "summary.json").write_text(json.dumps(result.summary, indent=2, sort_keys=True))
    _print_json(result.summary)
    return EXIT_OK


def cmd_batch(args) -> int:
    sc = _scenario(args)
    if args.policies:
        policies = [p.strip() for p in args.policies.split(",") if p.strip()]
        unknown = [p for p in policies if p not in POLICY_KINDS]
        if unknown:
            raise ScenarioValidationError([f"--policies: unknown policy {p!r}" for p in unknown])
    else:
        policies = sorted({t.policy for t in sc.teams.values() if t.role == "pursuer"})
    result = compare_policies(sc, policies, args.runs, args.seed_base, args.jobs)
    if args.out:
        out = _out_dir(args.out)
        (out / "aggregate.json").write_text(json.dumps(result, indent=2, sort_keys=True))
    _print_json(result)
    return EXIT_OK


def cmd_risk_curve(args) -> int:
    a = GaussianObservation([args.mean_a], [[args.var_a]])
    b = GaussianObservation([args.mean_b], [[args.var_b]])
    curve = risk_curve(a, b)
    d2 = mahalanobis_sq(CommonFrameObservation.from_gaussian(a),
                        CommonFrameObservation.from_gaussian(b))
    info = {"mahalanobis_sq": d2, "agree": d2 <= 1.0, "convex": curve_convexity_test(curve),
            "points": len(curve)}
    if args.out:
        path = _out_dir(args.out) / "risk_curve.jsonl"
        emit_plot_data(curve, path)
        info["path"] = str(path)
    _print_json(info)
    return EXIT_OK


def cmd_validate(args) -> int:
    sc = load_scenario(args.scenario)
    print(f"ok: {len(sc.robots)} robots, {len(sc.obstacles)} obstacles, seed {sc.seed}")
    return EXIT_OK


def cmd_replay(args) -> int:
    """Re-run the scenario stored in a trace header and compare step records."""
    trace = read_trace(args.trace)
    sc = parse_scenario(trace.header["scenario"])
    fresh = run(sc.with_overrides(max_steps=trace.steps)).trace
    n = len(trace.records)
    matches = fresh.records[:n] == trace.records
    _print_json({"records": n, "identical": matches})
    return EXIT_OK if matches else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="teamfusion",
                                description="Team consensus fusion and pursuit-evasion games.")
    sub = p.add_subparsers(dest="command", required=True)

    def scenario_cmd(name, help_text):
        s = sub.add_parser(name, help=help_text)
        s.add_argument("scenario", help="scenario YAML file")
        s.add_argument("--seed", type=int, help="override the scenario seed")
        s.add_argument("--max-steps", type=int, help="override max_steps")
        s.add_argument("--out", help="output directory")
        return s

    s = scenario_cmd("run", "play one game and write its trace")
    s.add_argument("--policy", choices=POLICY_KINDS, help="override every pursuer team policy")
    s.set_defaults(func=cmd_run)

    s = scenario_cmd("batch", "run seeded games and aggregate")
    s.add_argument("--runs", type=int, default=10)
    s.add_argument("--seed-base", type=int, default=0)
    s.add_argument("--policies", help="comma-separated pursuer policies to compare")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_batch)

    s = sub.add_parser("risk-curve", help="emit the utility curve of two scalar observations")
    s.add_argument("--mean-a", type=float, required=True)
    s.add_argument("--var-a", type=float, default=1.0)
    s.add_argument("--mean-b", type=float, required=True)
    s.add_argument("--var-b", type=float, default=1.0)
    s.add_argument("--out", help="output directory")
    s.set_defaults(func=cmd_risk_curve)

    s = sub.add_parser("validate", help="check a scenario file")
    s.add_argument("scenario")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("replay", help="re-run a trace's scenario and check it reproduces")
    s.add_argument("trace")
    s.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "runs", 1) < 1 or getattr(args, "jobs", 1) < 1:
        print("error: --runs and --jobs must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ScenarioParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ScenarioValidationError as exc:
        print("validation error:", file=sys.stderr)
        for e in exc.errors:
            print(f"  {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
