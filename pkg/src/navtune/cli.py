"""Command-line entry points: run, sweep, render, calibrate, serve.

Exit codes: 0 success / expectation met, 1 expectation failed, 2 input
error.  All outputs are deterministic for identical inputs.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path as FsPath

from .executive import Navigator, outcome_matches
from .params import ParameterRegistry, PatchError
from .world import CalibrationError, calibrate_from_odom, load_odom_csv, load_scenario

SWEEP_FIELDS = [
    "value",
    "outcome",
    "time",
    "path_length",
    "min_clearance",
    "centering",
    "recoveries",
]


class CliError(Exception):
    """Input/usage error; maps to exit code 2."""


def _load_scenario_file(path_str: str, overrides: list[str]):
    path = FsPath(path_str)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CliError(f"cannot read scenario: {exc}") from exc
    try:
        scenario = load_scenario(text, base_dir=path.parent, name=path.stem)
    except (ValueError, OSError) as exc:
        raise CliError(f"bad scenario: {exc}") from exc
    for item in overrides:
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise CliError(f"--set expects name=value, got {item!r}")
        scenario.overrides[name] = value
    return scenario


def _run_navigator(scenario, record_frames: bool):
    try:
        nav = Navigator(scenario, record_frames=record_frames)
    except (PatchError, ValueError) as exc:
        raise CliError(str(exc)) from exc
    metrics = nav.run()
    return nav, metrics


def _event_log_text(nav) -> str:
    return "".join(
        f"{e['t']} {e['state']} {e['event']} {e['detail']}\n" for e in nav.events
    )


def cmd_run(args) -> int:
    scenario = _load_scenario_file(args.scenario, args.set)
    nav, metrics = _run_navigator(scenario, record_frames=bool(args.report or args.frames))
    doc = metrics.as_record()
    doc["expect"] = scenario.expect
    doc["expect_met"] = outcome_matches(scenario.expect, metrics)
    print(json.dumps(doc, sort_keys=True))
    if args.frames:
        with open(args.frames, "w") as fh:
            for frame in nav.frames:
                fh.write(json.dumps(frame, separators=(",", ":")) + "\n")
    if args.report:
        out = FsPath(args.report)
        out.mkdir(parents=True, exist_ok=True)
        (out / "metrics.json").write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
        (out / "events.log").write_text(_event_log_text(nav))
        from . import report

        report.render_trace(nav.frames, nav.static, out, prefix=scenario.name)
        global_cm, local_cm = nav._sense_and_compose()
        report.render_snapshot(
            global_cm,
            out,
            prefix=f"{scenario.name}_final",
            path=nav.path.waypoints if nav.path else None,
            robot=nav.state.pose,
            goal=nav.goal_stack[0].pose,
        )
    return 0 if doc["expect_met"] else 1


def cmd_sweep(args) -> int:
    scenario = _load_scenario_file(args.scenario, args.set)
    registry = ParameterRegistry()
    desc = registry.descriptors.get(args.param)
    if desc is None:
        raise CliError(f"unknown parameter {args.param!r}")
    try:
        raw_values = [v for v in args.values.split(",") if v.strip() != ""]
        if not raw_values:
            raise ValueError("empty value list")
        values = [desc.validate(
            v.strip().lower() in ("1", "true") if desc.type == "bool" else (
                int(float(v)) if desc.type == "int" else float(v)
            )
        ) for v in raw_values]
    except (ValueError, PatchError) as exc:
        raise CliError(f"bad sweep values: {exc}") from exc

    rows = []
    for value in sorted(set(values)):
        sc = load_scenario(
            FsPath(args.scenario).read_text(),
            base_dir=FsPath(args.scenario).parent,
            name=scenario.name,
        )
        sc.overrides.update(scenario.overrides)
        sc.overrides[args.param] = str(value)
        _, metrics = _run_navigator(sc, record_frames=False)
        row = {"value": value, **metrics.as_record()}
        rows.append(row)

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row[k] for k in SWEEP_FIELDS})
    text = buf.getvalue()
    if args.out:
        FsPath(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.report:
        from . import report

        report.render_sweep(rows, args.param, args.report, prefix=scenario.name)
    return 0


def cmd_render(args) -> int:
    scenario = _load_scenario_file(args.scenario, args.set)
    if not (args.t >= 0) or args.t > scenario.time_limit:
        raise CliError(f"t must be within [0, {scenario.time_limit}]")
    try:
        nav = Navigator(scenario, record_frames=True)
    except (PatchError, ValueError) as exc:
        raise CliError(str(exc)) from exc
    while nav.state.time < args.t - 1e-9 and nav.nav_state not in ("Reached", "Aborted"):
        nav.cycle()
    _, local_cm = nav._sense_and_compose()
    candidates = nav.frames[-1]["candidates"] if nav.frames else None
    from . import report

    written = report.render_snapshot(
        local_cm,
        args.out,
        prefix=f"{scenario.name}_t{args.t:g}",
        path=nav.path.waypoints if nav.path else None,
        candidates=candidates,
        robot=nav.state.pose,
        goal=nav.goal_stack[0].pose,
    )
    for path in written:
        print(path)
    return 0


def cmd_calibrate(args) -> int:
    per_log = []
    for path_str in args.odom:
        try:
            samples = load_odom_csv(FsPath(path_str).read_text())
            est = calibrate_from_odom(samples)
        except (OSError, ValueError, CalibrationError) as exc:
            raise CliError(f"{path_str}: {exc}") from exc
        per_log.append({"log": path_str, **est})
    keys = ["v_max", "omega_max", "a_t_max", "a_r_max"]
    average = {}
    for k in keys:
        vals = [e[k] for e in per_log if e[k] is not None]
        average[k] = sum(vals) / len(vals) if vals else None
    print(json.dumps({"logs": per_log, "average": average}, sort_keys=True))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    scenario = _load_scenario_file(args.scenario, args.set)
    app = create_app(
        scenario, base_dir=str(FsPath(args.scenario).parent), static_dir=args.ui
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="navtune", description="2D navigation stack tuning workbench"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("scenario", help="scenario file")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="NAME=VALUE",
            help="registry override (repeatable)",
        )

    p = sub.add_parser("run", help="run one scenario and print metrics JSON")
    add_common(p)
    p.add_argument("--frames", help="write the frame log (JSON lines)")
    p.add_argument("--report", help="write metrics, events and figures to this directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a scenario across parameter values")
    add_common(p)
    p.add_argument("--param", required=True, help="registry parameter name")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.add_argument("--report", help="also render metric figures to this directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("render", help="render snapshot images at sim time t")
    add_common(p)
    p.add_argument("--t", type=float, default=0.0, help="sim time (s)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("calibrate", help="estimate velocity/acceleration limits")
    p.add_argument("odom", nargs="+", help="odometry CSV file(s): t,x,y,theta,vx,omega")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("serve", help="launch the HTTP/WebSocket tuning service")
    add_common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8642)
    p.add_argument("--ui", help="serve this directory as the browser UI")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
