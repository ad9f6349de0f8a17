"""
Command-line interface.

    wavemap run <name|path.json> [--n INT] [--t-end REAL] [--cfl REAL] [--out DIR]
    wavemap plot <frames.csv> [--snapshots t1,t2,...] [--out DIR]
    wavemap verify <suite>
    wavemap scenarios

Exit codes: 0 success, 1 usage or bad input, 2 solver abort, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .diagnostics import energy_report, estimate_period
from .errors import ChartDomainExceeded, NoPeriodFound, WavemapError
from .output import cycle_windows, plot_frames, read_frames, write_energy, write_frames
from .scenarios import SCENARIO_NAMES, builtin_scenario, resolve, validate
from .solver import initial_state, simulate
from .verify import SUITES, run_suite

EXIT_OK, EXIT_USAGE, EXIT_ABORT, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_out(name: str) -> Path:
    return Path(os.environ.get("WAVEMAP_OUT", "wavemap-out")) / name


def _period_or_none(frames):
    try:
        return estimate_period(frames)
    except NoPeriodFound:
        return None


def _write_outputs(out, sc, chart, frames, mp, status, failure=None, svg=False):
    report = energy_report(chart, frames, mp)
    report.estimated_period = _period_or_none(frames) if len(frames) >= 3 else None
    out.mkdir(parents=True, exist_ok=True)
    write_frames(out / "frames.csv", frames, sc.chart)
    write_energy(out / "energy.csv", report)
    manifest = {
        "scenario": sc.to_json(),
        "status": status,
        "frames": len(frames),
        "t_last": frames[-1].t,
        "relative_drift": report.relative_drift,
        "estimated_period": report.estimated_period,
        "files": ["frames.csv", "energy.csv"],
    }
    if failure is not None:
        manifest["failure_time"] = failure[0]
        manifest["failure"] = failure[1]
    if svg:
        table = read_frames(out / "frames.csv")
        period = report.estimated_period or (table.times[-1] - table.times[0])
        paths = plot_frames(out / "frames.csv", out, cycle_windows(table.times, period))
        manifest["files"].extend(p.name for p in paths)
    with open(out / "manifest.json", "w", encoding="ascii") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


def cmd_run(args) -> int:
    try:
        sc = resolve(args.scenario)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except WavemapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    overrides = {k: v for k, v in (("n", args.n), ("t_end", args.t_end), ("cfl", args.cfl),
                                   ("record_every", args.record_every)) if v is not None}
    sc = replace(sc, **overrides)
    try:
        validate(sc)
    except WavemapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out) if args.out else _default_out(sc.name)
    svg = args.svg or "svg" in sc.outputs

    chart, curve, mp = sc.build()
    state0 = initial_state(chart, curve, sc.n)
    status, failure, code = "ok", None, EXIT_OK
    try:
        frames = simulate(chart, state0, mp.c, sc.t_end, sc.solver_config())
    except ChartDomainExceeded as exc:
        frames = exc.frames or [state0]
        status, failure, code = "aborted", (exc.t, str(exc)), EXIT_ABORT
        print(f"solver aborted at t = {exc.t}: {exc}", file=sys.stderr)
    try:
        report = _write_outputs(out, sc, chart, frames, mp, status, failure, svg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    period = report.estimated_period
    print(f"{sc.name}: {len(frames)} frames to t = {frames[-1].t:.6g}, "
          f"energy drift {report.relative_drift:.3e}, "
          f"period {'n/a' if period is None else f'{period:.6g}'}; wrote {out}")
    return code


def _parse_times(text):
    if not text:
        return None
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad snapshot list {text!r}") from None


def cmd_plot(args) -> int:
    try:
        snapshots = _parse_times(args.snapshots)
        w, h = (int(v) for v in args.size.lower().split("x"))
    except (argparse.ArgumentTypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        paths = plot_frames(args.frames, args.out, snapshots, (w, h))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except WavemapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = run_suite(args.suite)
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_USAGE


def cmd_scenarios(args) -> int:
    for name in SCENARIO_NAMES:
        sc = builtin_scenario(name)
        a, b = sc.m_range
        print(f"{name:18s} {sc.chart:10s} m in [{a:.6g}, {b:.6g}]  n={sc.n} t_end={sc.t_end:g}  "
              f"{sc.description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wavemap", description="Vibrating elastic strings in Riemannian surfaces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run a built-in scenario or a JSON scenario file")
    r.add_argument("scenario")
    r.add_argument("--n", type=int)
    r.add_argument("--t-end", type=float)
    r.add_argument("--cfl", type=float)
    r.add_argument("--record-every", type=int)
    r.add_argument("--out")
    r.add_argument("--svg", action="store_true", help="also write per-half-cycle SVG snapshots")
    r.set_defaults(func=cmd_run)

    pl = sub.add_parser("plot", help="SVG snapshots from a frames.csv")
    pl.add_argument("frames")
    pl.add_argument("--snapshots", help="comma-separated window boundaries")
    pl.add_argument("--out")
    pl.add_argument("--size", default="800x600")
    pl.set_defaults(func=cmd_plot)

    v = sub.add_parser("verify", help="run a self-check suite")
    v.add_argument("suite", choices=SUITES + ("all",))
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("scenarios", help="list built-in scenarios")
    s.set_defaults(func=cmd_scenarios)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
