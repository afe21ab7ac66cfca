"""Command-line entry point: ``cablegp <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

from . import __version__
from .errors import CableGPError, NumericalError
from .extract import clusters_to_json, extract_clusters, load_grid, load_clusters
from .frame import (CableMap, SurveyConfig, config_from_mapping, load_config, parse_points_csv,
                    points_to_csv)
from .pipeline import (PipelineRun, detections_from_clusters, read_text, run_pipeline, stage,
                       write_atomic)

log = logging.getLogger("cablegp")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _common(parser):
    g = parser.add_argument_group("survey configuration")
    g.add_argument("--config", metavar="PATH", help="key = value survey config file")
    g.add_argument("--seed", type=int, metavar="N")
    g.add_argument("--beta", type=float, metavar="F")
    g.add_argument("--theta-y", type=float, metavar="F")
    g.add_argument("--theta-z", type=float, metavar="F")
    g.add_argument("--line-spacing", type=float, metavar="F")
    g.add_argument("--min-trace-points", type=int, metavar="N")
    g.add_argument("--sample-step", type=float, metavar="F")
    g.add_argument("--print-config", action="store_true", help="print the effective config and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cablegp", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthetic detections from a scenario")
    _common(p)
    p.add_argument("--input", metavar="PATH", help="scenario key = value file (defaults to one canonical cable)")
    p.add_argument("--output", metavar="PATH", default="-", help="points CSV ('-' for stdout)")
    p.add_argument("--truth", metavar="PATH", help="write ground-truth cables as JSON")

    p = sub.add_parser("extract", help="B-scan grid(s) -> cluster file")
    _common(p)
    p.add_argument("--input", metavar="PATH", action="append", required=True)
    p.add_argument("--output", metavar="PATH", default="-")
    p.add_argument("--threshold", type=float, help="absolute cut (default: half the peak |amplitude|)")
    p.add_argument("--min-cluster-size", type=int, default=5)
    p.add_argument("--connectivity", type=int, choices=(4, 8), default=4)

    p = sub.add_parser("fit-hyperbolas", help="cluster file -> detected points CSV")
    _common(p)
    p.add_argument("--input", metavar="PATH", action="append", required=True)
    p.add_argument("--output", metavar="PATH", default="-")
    p.add_argument("--report", metavar="PATH", help="per-cluster fit reports (JSON)")
    p.add_argument("--strict", action="store_true", help="fail on degenerate clusters instead of dropping them")

    p = sub.add_parser("map", help="detections / clusters / grids / scenario -> cable map")
    _common(p)
    p.add_argument("--input", metavar="PATH", action="append", required=True)
    p.add_argument("--input-mode", choices=("auto", "points", "clusters", "grids", "scenario"), default="auto")
    p.add_argument("--output", metavar="PATH", default="-")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--report", metavar="PATH")
    p.add_argument("--svg", metavar="PATH")
    p.add_argument("--strict", action="store_true")

    p = sub.add_parser("evaluate", help="score a cable map against ground truth")
    _common(p)
    p.add_argument("--input", metavar="PATH", required=True, help="cable map JSON")
    p.add_argument("--truth", metavar="PATH", required=True)
    p.add_argument("--points", metavar="PATH", help="detections CSV; its x values are the evaluation lines")
    p.add_argument("--output", metavar="PATH", default="-")
    p.add_argument("--table", action="store_true", help="print an aligned error table to stderr")

    p = sub.add_parser("render", help="cable map -> plan-view SVG")
    _common(p)
    p.add_argument("--input", metavar="PATH", required=True, help="cable map JSON")
    p.add_argument("--points", metavar="PATH")
    p.add_argument("--svg", metavar="PATH", required=True)
    return parser


def resolve_config(args) -> SurveyConfig:
    """Defaults, then --config file, then individual flags."""
    config = SurveyConfig()
    if args.config:
        with stage("survey_frame"):
            config = load_config(args.config, base=config)
    overrides = {
        "beta": args.beta, "theta_y": args.theta_y, "theta_z": args.theta_z,
        "min_trace_points": args.min_trace_points, "sample_step": args.sample_step,
    }
    values = {k: str(v) for k, v in overrides.items() if v is not None}
    if values:
        config = config_from_mapping(values, base=config)
    if args.line_spacing is not None:
        config = config.with_spacing(args.line_spacing)
    return config


def cmd_simulate(args, config):
    from .synthetic import load_scenario, scenario_from_mapping, truths_to_json

    with stage("synthetic_oracle"):
        if args.input:
            scenario = load_scenario(args.input, config)
            if args.line_spacing is not None:
                scenario = replace(scenario, config=scenario.config.with_spacing(args.line_spacing))
        else:
            first, last = config.line_positions[0], config.line_positions[-1]
            scenario = scenario_from_mapping({"x_start": repr(first), "x_end": repr(last)}, config)
            scenario = replace(scenario, config=config)
        points = scenario.detections(args.seed)
    write_atomic(args.output, points_to_csv(points))
    if args.truth:
        write_atomic(args.truth, truths_to_json(scenario.cables))
    return EXIT_OK


def cmd_extract(args, config):
    clusters = []
    with stage("cluster_extract"):
        for path in args.input:
            clusters.extend(extract_clusters(load_grid(path), threshold=args.threshold,
                                             min_cluster_size=args.min_cluster_size,
                                             connectivity=args.connectivity))
    if not clusters:
        log.warning("no clusters found")
    write_atomic(args.output, clusters_to_json(clusters))
    return EXIT_OK


def cmd_fit(args, config):
    clusters = []
    with stage("cluster_extract"):
        for path in args.input:
            clusters.extend(load_clusters(path))
    with stage("hyperbola_fit"):
        points, records = detections_from_clusters(clusters, config, strict=args.strict)
    outputs = {args.output: points_to_csv(points)}
    if args.report:
        outputs[args.report] = json.dumps(records, indent=1) + "\n"
    for path, text in outputs.items():
        write_atomic(path, text)
    return EXIT_OK


def cmd_map(args, config):
    run = PipelineRun(config=config, inputs=args.input, input_mode=args.input_mode,
                      map_path=args.output, report_path=args.report, svg_path=args.svg,
                      seed=args.seed, map_format=args.format, strict=args.strict)
    status, _ = run_pipeline(run)
    return status


def cmd_evaluate(args, config):
    from .evaluation import evaluate_map, format_table, reports_to_json
    from .synthetic import load_truths

    with stage("evaluation"):
        cable_map = CableMap.from_json(read_text(args.input), path=args.input)
        truths = load_truths(args.truth)
        if args.points:
            line_xs = sorted({p.x for p in parse_points_csv(read_text(args.points), path=args.points)})
        else:
            line_xs = list(config.line_positions)
        reports = evaluate_map(cable_map, truths, line_xs, seed=args.seed or 0)
    write_atomic(args.output, reports_to_json(reports))
    if args.table:
        sys.stderr.write(format_table(reports))
    return EXIT_OK


def cmd_render(args, config):
    from .render import render_svg

    cable_map = CableMap.from_json(read_text(args.input), path=args.input)
    points = parse_points_csv(read_text(args.points), path=args.points) if args.points else []
    line_xs = sorted({p.x for p in points}) or list(config.line_positions)
    write_atomic(args.svg, render_svg(cable_map, points, line_xs))
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "extract": cmd_extract,
    "fit-hyperbolas": cmd_fit,
    "map": cmd_map,
    "evaluate": cmd_evaluate,
    "render": cmd_render,
}


def main(argv=None) -> int:
    logging.basicConfig(format="%(levelname)s: %(message)s", level=logging.WARNING, stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        if args.print_config:
            sys.stdout.write(config.to_text())
            return EXIT_OK
        return COMMANDS[args.command](args, config)
    except CableGPError as exc:
        where = getattr(exc, "stage", None)
        prefix = f"{where}: " if where else ""
        sys.stderr.write(f"error: {prefix}{type(exc).__name__}: {exc}\n")
        if isinstance(exc, NumericalError):
            return EXIT_NUMERIC
        return EXIT_INPUT
    except OSError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
