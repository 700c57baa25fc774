"""Command-line interface: build readings, compose spheres, diagnose, render.

Exit codes: 0 success, 1 domain/validation failure (bad table, degenerate
geometry, unreadable config), 2 usage errors (argparse).  The ``--config``
flag or the ``POLICY_COMPASS_CONFIG`` environment variable points at a flat
JSON config file applied to every command.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Sequence

from .aggregate import CompassReading, DegenerateTriangleError, compass_reading
from .elicitation import Ballot, Intensity, angle_from_votes
from .model import (
    IndicatorValidationError,
    QUALITIES,
    Quality,
    Sphere,
    format_number,
)
from .render import (
    RenderOptions,
    RenderStage,
    render_compass,
    render_ecological,
    render_trajectory,
)
from .robustness import convergence_report, grade_table, influence_report
from .spheres import compose_spheres
from .tableio import (
    ConfigError,
    LoadedConfig,
    TableParseError,
    ecological_to_dict,
    load_config,
    parse_table,
    reading_to_dict,
    to_canonical_json,
    write_table,
)

CONFIG_ENV = "POLICY_COMPASS_CONFIG"


class CliError(Exception):
    """Failure with a process exit code: 1 validation, 2 I/O or environment."""

    def __init__(self, message: str, code: int = 1):
        super().__init__(message)
        self.code = code


def _detect_format(path: str, override: "str | None") -> str:
    if override:
        return override
    suffix = Path(path).suffix.lower()
    if suffix == ".json":
        return "json"
    return "csv"


def _read_table(path: str, format_override: "str | None"):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CliError("cannot read %s: %s" % (path, exc), code=2)
    try:
        return parse_table(data, _detect_format(path, format_override))
    except TableParseError as exc:
        lines = ["%s: invalid table" % path]
        for issue in exc.issues:
            where = "row %d" % issue.row if issue.row else "document"
            if issue.column:
                where += ", column %s" % issue.column
            lines.append("  %s: %s [%s]" % (where, issue.message, issue.code))
        raise CliError("\n".join(lines))


def _load_cli_config(path: "str | None") -> LoadedConfig:
    chosen = path or os.environ.get(CONFIG_ENV)
    if not chosen:
        return load_config(None)
    try:
        data = Path(chosen).read_bytes()
    except OSError as exc:
        raise CliError("cannot read config %s: %s" % (chosen, exc), code=2)
    try:
        return load_config(data)
    except ConfigError as exc:
        lines = ["%s: invalid config" % chosen]
        for issue in exc.issues:
            lines.append("  %s: %s [%s]" % (issue.column or "-", issue.message, issue.code))
        raise CliError("\n".join(lines))


def _emit(text: str, out_path: "str | None") -> None:
    if out_path:
        try:
            Path(out_path).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise CliError("cannot write %s: %s" % (out_path, exc), code=2)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _reading_summary(reading: CompassReading) -> str:
    lines = [
        "institution: %s" % reading.table.institution,
        "indicators: %d" % len(reading.table.indicators),
        "classification: %s" % reading.classification.value,
    ]
    if reading.final.magnitude > 0.0:
        lines.append(
            "final: magnitude=%.6f angle=%.6f"
            % (reading.final.magnitude, reading.final.angle_degrees)
        )
    else:
        lines.append("final: magnitude=0.000000 angle=n/a")
    return "\n".join(lines)


def _cmd_build(args: argparse.Namespace) -> int:
    table = _read_table(args.input, args.format)
    loaded = _load_cli_config(args.config)
    try:
        reading = compass_reading(table, loaded.compass)
    except DegenerateTriangleError as exc:
        raise CliError("degenerate construction: %s" % exc)
    if args.json:
        _emit(to_canonical_json(reading_to_dict(reading)), args.out)
    else:
        _emit(_reading_summary(reading), args.out)
    return 0


def _cmd_ee(args: argparse.Namespace) -> int:
    loaded = _load_cli_config(args.config)
    readings = {}
    for sphere, path in (
        (Sphere.ECO, args.eco),
        (Sphere.SOCIO, args.socio),
        (Sphere.ECONO, args.econo),
    ):
        table = _read_table(path, args.format)
        if table.sphere is not sphere:
            raise CliError(
                "%s: expected a %s table, found %s"
                % (path, sphere.value, table.sphere.value)
            )
        try:
            readings[sphere] = compass_reading(table, loaded.compass)
        except DegenerateTriangleError as exc:
            raise CliError("%s: degenerate construction: %s" % (path, exc))
    composed = compose_spheres(readings, weights=loaded.weights, config=loaded.compass)
    if args.json:
        _emit(to_canonical_json(ecological_to_dict(composed)), args.out)
        return 0
    lines = [
        "classification: %s" % composed.classification.value,
        "sustainable: %s" % ("true" if composed.sustainable else "false"),
    ]
    if composed.composed_final.magnitude > 0.0:
        lines.append(
            "composed: magnitude=%.6f angle=%.6f"
            % (composed.composed_final.magnitude, composed.composed_final.angle_degrees)
        )
    else:
        lines.append("composed: magnitude=0.000000 angle=n/a")
    _emit("\n".join(lines), args.out)
    return 0


def _cmd_diagnose(args: argparse.Namespace) -> int:
    table = _read_table(args.input, args.format)
    loaded = _load_cli_config(args.config)
    epsilon = args.epsilon if args.epsilon is not None else loaded.robustness.convergence_epsilon
    window = args.window if args.window is not None else loaded.robustness.convergence_window
    grade = grade_table(table, loaded.compass, loaded.robustness)
    lines = ["robust: %s" % ("true" if grade.robust else "false")]
    for reason in grade.reasons:
        lines.append("reason: %s" % reason)
    if grade.outlier_ids:
        lines.append("outliers: %s" % ", ".join(grade.outlier_ids))
    if table.indicators:
        convergence = convergence_report(
            table.indicators, loaded.compass, epsilon=epsilon, window=window
        )
        lines.append("convergence (epsilon=%s window=%d):"
                     % (format_number(epsilon), window))
        for quality in QUALITIES:
            stable = convergence.stable[quality]
            if stable is None:
                verdict = "undetermined (stream shorter than the window)"
            elif stable:
                verdict = "stable at index %d" % convergence.first_stable_index[quality]
            else:
                verdict = "not stable"
            lines.append("  %s: %s" % (quality.value, verdict))
    if table.indicators:
        report = influence_report(
            table, loaded.compass, loaded.robustness.outlier_threshold
        )
        lines.append("influence:")
        for entry in report.entries:
            angle = (
                "%.6f" % entry.angle_delta_degrees
                if entry.angle_delta_degrees is not None
                else "n/a"
            )
            lines.append(
                "  %s displacement=%.6f angle_delta=%s magnitude_delta=%.6f outlier=%s"
                % (
                    entry.indicator_id,
                    entry.displacement,
                    angle,
                    entry.magnitude_delta,
                    "true" if entry.outlier else "false",
                )
            )
    _emit("\n".join(lines), args.out)
    if args.strict and not grade.robust:
        return 1
    return 0


def _cmd_render(args: argparse.Namespace) -> int:
    loaded = _load_cli_config(args.config)
    try:
        stage = RenderStage(args.stage)
    except ValueError:
        raise CliError("unknown stage %r" % args.stage)
    options = RenderOptions(stage=stage, size_px=args.size)
    if stage in (RenderStage.SPHERES, RenderStage.COMPOSITION):
        if not (args.eco and args.socio and args.econo):
            raise CliError("stage %s needs --eco/--socio/--econo tables" % stage.value)
        readings = {}
        for sphere, path in (
            (Sphere.ECO, args.eco),
            (Sphere.SOCIO, args.socio),
            (Sphere.ECONO, args.econo),
        ):
            readings[sphere] = compass_reading(
                _read_table(path, args.format), loaded.compass
            )
        composed = compose_spheres(readings, weights=loaded.weights, config=loaded.compass)
        svg = render_ecological(composed, options)
    elif stage is RenderStage.TRAJECTORY:
        if not args.inputs:
            raise CliError("stage trajectory needs one or more input tables")
        readings_list = [
            compass_reading(_read_table(path, args.format), loaded.compass)
            for path in args.inputs
        ]
        svg = render_trajectory(readings_list, options)
    else:
        if len(args.inputs) != 1:
            raise CliError("stage %s renders exactly one table" % stage.value)
        reading = compass_reading(_read_table(args.inputs[0], args.format), loaded.compass)
        grade = None
        if args.annotate:
            grade = grade_table(
                reading.table, loaded.compass, loaded.robustness
            )
            options = RenderOptions(
                stage=stage, size_px=args.size, robustness_annotation=True
            )
        svg = render_compass(reading, options, grade=grade)
    _emit(svg, args.out)
    return 0


def _parse_ballot(text: str) -> Ballot:
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise CliError(
            "ballot %r must look like voter:weight:toward[:intensity]" % text
        )
    voter, weight, toward = parts[0], parts[1], parts[2]
    intensity = parts[3] if len(parts) == 4 else "light"
    try:
        return Ballot(
            voter=voter,
            toward=Quality(toward),
            weight=float(weight),
            intensity=Intensity(intensity),
        )
    except ValueError as exc:
        raise CliError("bad ballot %r: %s" % (text, exc))


def _cmd_vote(args: argparse.Namespace) -> int:
    table = _read_table(args.input, args.format)
    loaded = _load_cli_config(args.config)
    target = table.get(args.id)
    if target is None:
        raise CliError("no indicator with id %r" % args.id)
    ballots = [_parse_ballot(text) for text in args.ballot]
    try:
        offset = angle_from_votes(ballots, target.quality, loaded.compass.layout)
    except ValueError as exc:
        raise CliError(str(exc))
    lines = [
        "indicator: %s" % target.id,
        "offset: %s" % format_number(offset),
        "absolute: %s"
        % format_number(
            (loaded.compass.layout.start(target.quality) + offset) % 360.0
        ),
    ]
    if args.apply:
        from dataclasses import replace

        boundary = offset in (0.0, 120.0)
        updated = table.with_replaced(
            replace(target, offset=offset, boundary_ok=target.boundary_ok or boundary)
        )
        fmt = _detect_format(args.apply, args.format)
        Path(args.apply).write_text(write_table(updated, fmt), encoding="utf-8")
        lines.append("wrote: %s" % args.apply)
    _emit("\n".join(lines), args.out)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import run_server

    run_server(host=args.host, port=args.port, data_dir=args.data_dir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="policy-compass",
        description="Indicator-compass readings, sphere composition, and diagnostics.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", help="flat JSON config file (or $%s)" % CONFIG_ENV
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", parents=[common],
                             help="compute a reading from one table")
    p_build.add_argument("input")
    p_build.add_argument("--format", choices=("csv", "json"))
    p_build.add_argument("--json", action="store_true", help="emit the full reading as JSON")
    p_build.add_argument("--out")
    p_build.set_defaults(func=_cmd_build)

    p_ee = sub.add_parser("ee", parents=[common], help="compose eco/socio/econo tables")
    p_ee.add_argument("eco")
    p_ee.add_argument("socio")
    p_ee.add_argument("econo")
    p_ee.add_argument("--format", choices=("csv", "json"))
    p_ee.add_argument("--json", action="store_true")
    p_ee.add_argument("--out")
    p_ee.set_defaults(func=_cmd_ee)

    p_diag = sub.add_parser("diagnose", parents=[common], help="robustness grade and per-indicator influence")
    p_diag.add_argument("input")
    p_diag.add_argument("--format", choices=("csv", "json"))
    p_diag.add_argument("--epsilon", type=float, default=None,
                        help="convergence distance threshold")
    p_diag.add_argument("--window", type=int, default=None,
                        help="trailing window for stability")
    p_diag.add_argument("--strict", action="store_true",
                        help="exit 1 when the table is not robust")
    p_diag.add_argument("--out")
    p_diag.set_defaults(func=_cmd_diagnose)

    p_render = sub.add_parser("render", parents=[common], help="write an SVG for a stage")
    p_render.add_argument("inputs", nargs="*")
    p_render.add_argument("--stage", default="final",
                          choices=[s.value for s in RenderStage])
    p_render.add_argument("--size", type=int, default=640)
    p_render.add_argument("--format", choices=("csv", "json"))
    p_render.add_argument("--eco")
    p_render.add_argument("--socio")
    p_render.add_argument("--econo")
    p_render.add_argument("--annotate", action="store_true",
                          help="badge non-robust readings")
    p_render.add_argument("--out")
    p_render.set_defaults(func=_cmd_render)

    p_vote = sub.add_parser("vote", parents=[common], help="re-place one indicator from ballots")
    p_vote.add_argument("input")
    p_vote.add_argument("--id", required=True)
    p_vote.add_argument("--ballot", action="append", default=[],
                        help="voter:weight:toward[:intensity], repeatable")
    p_vote.add_argument("--format", choices=("csv", "json"))
    p_vote.add_argument("--apply", help="write the updated table to this path")
    p_vote.add_argument("--out")
    p_vote.set_defaults(func=_cmd_vote)

    p_serve = sub.add_parser("serve", parents=[common], help="run the HTTP session service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8600)
    p_serve.add_argument("--data-dir")
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: "Sequence[str] | None" = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(str(exc) + "\n")
        return exc.code
    except IndicatorValidationError as exc:
        sys.stderr.write("invalid indicator: %s\n" % exc)
        return 1
    except (TableParseError, ConfigError) as exc:
        sys.stderr.write(str(exc) + "\n")
        return 1
    except OSError as exc:
        sys.stderr.write(str(exc) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
