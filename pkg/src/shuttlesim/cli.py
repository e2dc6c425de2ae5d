"""Command-line entry points: run, record, compile-path, replay."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from shuttlesim.harness import (
    metrics_from_rows,
    read_log,
    record_trace,
    run_scenario,
    write_log,
)
from shuttlesim.scenario import ScenarioError, load_scenario
from shuttlesim.waypoints import (
    PathFormatError,
    compile_path,
    load_trace,
    save_trace,
    save_waypoints,
    waypoint_filename,
)


def _print_metrics(metrics, stream=sys.stdout):
    yaml.safe_dump(metrics.summary_dict(), stream, sort_keys=False)


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        from dataclasses import replace

        scenario = replace(scenario, seed=args.seed)
    from shuttlesim.harness import Simulation

    sim = Simulation(scenario)
    metrics, rows = sim.run()
    if args.log:
        write_log(rows, args.log)
    if args.sign_log:
        Path(args.sign_log).write_text(
            "t,d,n,a,b,c\n" + "\n".join(sim.sign_log_rows) + "\n"
        )
    if args.grid_dump:
        Path(args.grid_dump).write_text(
            "t,x,y,min_z,max_z\n" + "\n".join(sim.grid_dump_rows) + "\n"
        )
    if args.metrics:
        with open(args.metrics, "w") as fh:
            _print_metrics(metrics, fh)
    else:
        _print_metrics(metrics)
    return 0


def cmd_record(args) -> int:
    scenario = load_scenario(args.scenario)
    trace = record_trace(scenario)
    out = args.out or Path(args.scenario).with_suffix(".trace")
    save_trace(trace, out)
    print(f"recorded {len(trace)} samples -> {out}")
    return 0


def cmd_compile_path(args) -> int:
    trace = load_trace(args.trace)
    wlist = compile_path(trace, args.speed)
    out = args.out or Path(args.trace).parent / waypoint_filename(Path(args.trace).stem, args.speed)
    save_waypoints(wlist, out)
    print(f"compiled {len(wlist.waypoints)} waypoints -> {out}")
    return 0


def cmd_replay(args) -> int:
    rows = read_log(args.log)
    dt = rows[1].t - rows[0].t if len(rows) > 1 else 0.02
    metrics = metrics_from_rows(rows, dt)
    if args.metrics:
        with open(args.metrics, "w") as fh:
            _print_metrics(metrics, fh)
    else:
        _print_metrics(metrics)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shuttlesim",
        description="Deterministic desk-scale shuttle simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario closed loop")
    p_run.add_argument("scenario")
    p_run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_run.add_argument("--log", default=None, help="write the per-tick log here")
    p_run.add_argument("--metrics", default=None, help="write run metrics here (YAML)")
    p_run.add_argument("--sign-log", default=None, help="write per-tick sign detections here")
    p_run.add_argument("--grid-dump", default=None, help="write occupied grid cells per tick here")
    p_run.set_defaults(func=cmd_run)

    p_rec = sub.add_parser("record", help="drive the scenario's script and record a trace")
    p_rec.add_argument("scenario")
    p_rec.add_argument("--out", default=None, help="trace output path")
    p_rec.set_defaults(func=cmd_record)

    p_cmp = sub.add_parser("compile-path", help="turn a recorded trace into a waypoint file")
    p_cmp.add_argument("trace")
    p_cmp.add_argument("--speed", type=float, required=True, help="target speed, m/s")
    p_cmp.add_argument("--out", default=None, help="waypoint output path")
    p_cmp.set_defaults(func=cmd_compile_path)

    p_rep = sub.add_parser("replay", help="recompute metrics from a log file")
    p_rep.add_argument("log")
    p_rep.add_argument("--metrics", default=None, help="write metrics here instead of stdout")
    p_rep.set_defaults(func=cmd_replay)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, PathFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
