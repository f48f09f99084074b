"""Command-line interface: reproduction runs, trajectory dumps, config checks."""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import replace
from pathlib import Path

from . import plots
from .config import Config, ConfigError, default_config, load_config
from .experiments import (
    TABLE_HEADER,
    CellResult,
    ExperimentSpec,
    run_matrix,
    summarize,
    table_rows,
)
from .gait import build_loop_spline, derive_control_points, foot_target, wag_offset
from .kinematics import Unreachable, leg_workspace_contains
from .actuation import lift_overrun, required_joint_speeds
from .simulator import TRACE_HEADER, Simulation

RESULTS_HEADER = (
    "scenario,cell,replicate,seed,speed_m_per_min,distance_m,elapsed_s,"
    "timeout,saturation,slip"
)


def _load(args) -> Config:
    if getattr(args, "config", None):
        return load_config(args.config)
    return default_config()


def _write_results_csv(path: Path, blocks: list[tuple[ExperimentSpec, list[CellResult]]]):
    lines = [RESULTS_HEADER]
    for spec, results in blocks:
        for cr in results:
            for rep, ev in enumerate(cr.evaluations):
                lines.append(
                    f"{spec.name},{cr.cell.name},{rep},{ev.seed},"
                    f"{ev.achieved_speed:.6f},{ev.distance_m:.6f},"
                    f"{ev.elapsed_s:.4f},{int(ev.timeout)},"
                    f"{ev.saturation:.6f},{ev.slip_mm:.6f}"
                )
    path.write_text("\n".join(lines) + "\n")


def _write_summary_json(path: Path, blocks):
    doc = {}
    for spec, results in blocks:
        report = summarize(results)
        doc[spec.name] = {
            "protocol": spec.protocol,
            "replicates": spec.replicates,
            "base_seed": spec.base_seed,
            "cells": {
                cs.cell.name: {
                    "n": cs.n,
                    "min": round(cs.minimum, 3),
                    "max": round(cs.maximum, 3),
                    "mean": round(cs.mean, 3),
                }
                for cs in report.cells
            },
            "tests": [
                {
                    "a": t.cell_a,
                    "b": t.cell_b,
                    "U": t.u,
                    "p": t.p_raw,
                    "p_holm": t.p_holm,
                }
                for t in report.comparisons
            ],
            "notes": report.notes,
            "errors": {
                cr.cell.name: cr.error for cr in results if cr.error
            },
        }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_table_txt(path: Path, blocks):
    lines = [TABLE_HEADER, "-" * len(TABLE_HEADER)]
    for spec, results in blocks:
        report = summarize(results)
        lines.extend(table_rows(spec.name, report))
        for t in report.comparisons:
            lines.append(
                f"    {t.cell_a} vs {t.cell_b}: U = {t.u:g}, "
                f"p = {t.p_raw:.3g}, Holm-adjusted p = {t.p_holm:.3g}"
            )
        for note in report.notes:
            lines.append(f"    note: {note}")
    path.write_text("\n".join(lines) + "\n")


def _write_traces(out_dir: Path, blocks):
    trace_dir = out_dir / "traces"
    trace_dir.mkdir(parents=True, exist_ok=True)
    for spec, results in blocks:
        for cr in results:
            for rep, ev in enumerate(cr.evaluations):
                if not ev.trace:
                    continue
                rows = [TRACE_HEADER]
                rows += [
                    ",".join(f"{v:.6f}" if isinstance(v, float) else str(v) for v in row)
                    for row in ev.trace
                ]
                name = f"{spec.name}_{cr.cell.name}_{rep}.csv".replace("+", "_")
                (trace_dir / name).write_text("\n".join(rows) + "\n")


def _run_blocks(config: Config, specs, args) -> tuple[list, bool]:
    blocks = []
    failed = False
    for spec in specs:
        if args.seed is not None:
            spec = replace(spec, base_seed=args.seed)
        results = run_matrix(
            spec, config, jobs=args.jobs, noise=not args.no_noise,
            trace=args.trace,
        )
        for cr in results:
            if cr.error:
                failed = True
                print(f"{spec.name}/{cr.cell.name}: {cr.error}", file=sys.stderr)
        blocks.append((spec, results))
    return blocks, failed


def _emit_outputs(out_dir: Path, blocks, figures: bool, traces: bool):
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_results_csv(out_dir / "results.csv", blocks)
    _write_summary_json(out_dir / "summary.json", blocks)
    _write_table_txt(out_dir / "table.txt", blocks)
    if traces:
        _write_traces(out_dir, blocks)
    if figures:
        for spec, results in blocks:
            if any(cr.evaluations for cr in results):
                plots.save_speed_figure(
                    spec.name, results, out_dir / f"{spec.name}_speeds.png"
                )
    print((out_dir / "table.txt").read_text(), end="")


def cmd_reproduce(args) -> int:
    try:
        config = _load(args)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 1
    if args.scenario == "all":
        specs = list(config.experiments.values())
    elif args.scenario in config.experiments:
        specs = [config.experiments[args.scenario]]
    else:
        names = ", ".join(sorted(config.experiments) + ["all"])
        print(
            f"unknown scenario '{args.scenario}'; available: {names}",
            file=sys.stderr,
        )
        return 2
    blocks, failed = _run_blocks(config, specs, args)
    _emit_outputs(Path(args.out_dir), blocks, not args.no_figures, args.trace)
    return 1 if failed else 0


def cmd_run(args) -> int:
    try:
        config = load_config(args.config_path)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 1
    if not config.experiments:
        print(f"{config.source}: no experiments defined", file=sys.stderr)
        return 1
    blocks, failed = _run_blocks(config, list(config.experiments.values()), args)
    _emit_outputs(Path(args.out_dir), blocks, not args.no_figures, args.trace)
    return 1 if failed else 0


def cmd_dump_trajectory(args) -> int:
    try:
        config = _load(args)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 1
    if args.gait not in config.gaits:
        print(f"unknown gait '{args.gait}'", file=sys.stderr)
        return 2
    if args.morph not in config.morphologies:
        print(f"unknown morphology '{args.morph}'", file=sys.stderr)
        return 2
    gait = config.gaits[args.gait]
    morph = config.morphologies[args.morph]
    cp = derive_control_points(gait, morph, ground=args.ground_height)
    if not leg_workspace_contains(cp, morph):
        print(
            f"pairing {args.gait}+{args.morph} is unreachable "
            f"(ground {cp.p1.z:.1f} mm)",
            file=sys.stderr,
        )
        return 1
    spline = build_loop_spline(cp)
    rows = []
    try:
        for leg, off in _schedule_for(gait):
            for i in range(args.samples):
                t = i * gait.period / args.samples
                p = foot_target(t, off, gait, spline)
                w = wag_offset(t, gait)
                rows.append((leg, t, p.x, p.y, p.z, w.wx, w.wy))
    except Unreachable as exc:
        print(exc, file=sys.stderr)
        return 1
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = ["kind,t,leg,x,y,z,wag_x,wag_y"]
    for i, p in enumerate(cp, start=1):
        lines.append(f"control,,p{i},{p.x:.6f},{p.y:.6f},{p.z:.6f},,")
    for leg, t, x, y, z, wx, wy in rows:
        lines.append(
            f"sample,{t:.6f},{leg},{x:.6f},{y:.6f},{z:.6f},{wx:.6f},{wy:.6f}"
        )
    out.write_text("\n".join(lines) + "\n")
    fig_path = out.with_suffix(".png")
    one_leg = [("sample", t, leg, y, z) for leg, t, x, y, z, _, _ in rows
               if leg == "front_left"]
    plots.save_trajectory_figure(
        one_leg, list(cp), fig_path,
        title=f"{args.gait} gait on {args.morph} morphology",
    )
    print(f"wrote {out} and {fig_path}")
    return 0


def _schedule_for(gait):
    from .gait import leg_schedule

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return leg_schedule(lift_duration=gait.lift_duration)


def cmd_check(args) -> int:
    try:
        config = _load(args)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 1
    if not config.morphologies or not config.gaits:
        print("no presets: config defines no morphology/gait pairs", file=sys.stderr)
        return 1
    violations = 0
    cap = config.servo.policy_cap
    for gait_name, gait in config.gaits.items():
        if gait.lift_duration > 0.25:
            print(
                f"warning: gait '{gait_name}' lift_duration "
                f"{gait.lift_duration:g} > 0.25: swing windows overlap"
            )
        # Spare time between one leg's lift window and the next leg's, with
        # the default quarter-period crawl spacing; a rate-limited lift may
        # consume at most half of it (engineering reserve) before the
        # pairing is declared over-speed.
        spare = (0.25 - min(gait.lift_duration, 0.25)) * gait.period
        for morph_name, morph in config.morphologies.items():
            cp = derive_control_points(gait, morph)
            reachable = leg_workspace_contains(cp, morph)
            if not reachable:
                print(f"{gait_name} on {morph_name}: UNREACHABLE")
                violations += 1
                continue
            peaks = required_joint_speeds(gait, morph)
            overrun = lift_overrun(gait, morph, config.servo)
            over = overrun > spare / 2.0
            status = "OVER-SPEED" if over else "ok"
            print(
                f"{gait_name} on {morph_name}: peak joint speed "
                f"{peaks.max:6.2f} RPM vs cap {cap:g} RPM, lift overrun "
                f"{overrun:.3f} s vs {spare:.3f} s schedule margin: {status}"
            )
            if over:
                violations += 1
    return 1 if violations else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadmorph",
        description="Kinematic gait simulator for a leg-length-reconfigurable quadruped",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(p):
        p.add_argument("--seed", type=int, default=None,
                       help="override the base seed of every scenario")
        p.add_argument("--out-dir", default="results",
                       help="output directory (default: results)")
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel evaluation workers")
        p.add_argument("--no-noise", action="store_true",
                       help="disable per-evaluation speed noise")
        p.add_argument("--no-figures", action="store_true",
                       help="skip figure rendering")
        p.add_argument("--trace", action="store_true",
                       help="write per-evaluation step traces")

    p = sub.add_parser("reproduce", help="run a named scenario")
    p.add_argument("scenario", help="lab-15v | lab-10v | garage | outside | all")
    p.add_argument("--config", default=None, help="YAML config path")
    add_run_flags(p)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("run", help="run every experiment in a config file")
    p.add_argument("config_path", help="YAML config path")
    add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("dump-trajectory", help="export foot path samples")
    p.add_argument("--gait", default="base")
    p.add_argument("--morph", default="short")
    p.add_argument("--out", default="trajectory.csv")
    p.add_argument("--samples", type=int, default=720)
    p.add_argument("--ground-height", type=float, default=None,
                   help="override the derived ground height (mm)")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_dump_trajectory)

    p = sub.add_parser("check", help="validate config and gait feasibility")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
