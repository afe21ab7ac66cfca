"""End-to-end orchestration: clusters -> detections -> traces -> cable map."""

from __future__ import annotations

import contextlib
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .assign import assign_points, prune_short
from .errors import CableGPError, DegenerateCluster, InputError, NoConvergence, NonPositiveAxes
from .extract import extract_clusters, load_clusters, load_grid
from .frame import CableMap, SurveyConfig, normalize_points, parse_points_csv
from .gp import fit_map
from .hyperbola import apex_to_detection, fit_cluster, velocity_mismatch
from .synthetic import load_scenario

log = logging.getLogger("cablegp")

INPUT_MODES = ("points", "clusters", "grids", "scenario")


@contextlib.contextmanager
def stage(name):
    """Tag any library error escaping the block with the pipeline stage name."""
    try:
        yield
    except CableGPError as exc:
        if not hasattr(exc, "stage"):
            exc.stage = name
        raise


def write_atomic(path, text: str) -> None:
    """Write `text` to `path` via a temp file + rename; '-' means stdout."""
    if str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def read_text(path) -> str:
    if str(path) == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def detect_mode(path) -> str:
    name = str(path).lower()
    if name == "-":
        return "points"
    if name.endswith(".json"):
        return "clusters"
    if name.endswith(".csv"):
        with open(path, encoding="utf-8") as fh:
            first = fh.readline().strip().replace(" ", "")
        return "points" if first == "x,y,z" else "grids"
    return "scenario"


def detections_from_clusters(clusters, config: SurveyConfig, strict=False, max_iter=50, tol=1e-10):
    """Fit every cluster and convert apexes to detections.

    Degenerate clusters are skipped with a warning unless `strict`.
    Returns ``(points, fit_records)``.
    """
    points, records = [], []
    for idx, cluster in enumerate(clusters):
        try:
            report = fit_cluster(cluster, max_iter=max_iter, tol=tol)
        except (DegenerateCluster, NonPositiveAxes, NoConvergence) as exc:
            if strict:
                raise
            log.warning("dropping cluster #%d at line_x=%g: %s: %s",
                        idx, cluster.source_line_x, type(exc).__name__, exc)
            records.append({"cluster": idx, "line_x": cluster.source_line_x,
                            "dropped": type(exc).__name__})
            continue
        point = apex_to_detection(report.params, cluster.source_line_x, config.wave_speed_v)
        points.append(point)
        records.append({"cluster": idx, "line_x": cluster.source_line_x, **report.to_json_obj(),
                        "velocity_mismatch": velocity_mismatch(report.params, config.wave_speed_v)})
    return points, records


def locate_cables(points, config: SurveyConfig):
    """Normalize, assign, prune and GP-fit.  Returns ``(CableMap, summary)``."""
    with stage("survey_frame"):
        ordered = normalize_points(points)
    with stage("cable_assign"):
        traces = assign_points(ordered, config)
        kept = prune_short(traces, config.min_trace_points)
    if not kept:
        log.warning("no trace has >= %d points; the cable map is empty", config.min_trace_points)
    with stage("gp_regression"):
        cable_map = fit_map(kept, config)
    summary = {
        "n_points": len(ordered),
        "n_traces": len(traces),
        "n_cables": len(kept),
        "trace_lengths": [len(t) for t in kept],
    }
    return cable_map, summary


@dataclass
class PipelineRun:
    config: SurveyConfig
    inputs: list
    input_mode: str = "auto"
    map_path: str | None = None
    report_path: str | None = None
    svg_path: str | None = None
    seed: int | None = None
    map_format: str = "json"
    strict: bool = False
    artifacts: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.inputs:
            raise InputError("no input given")
        modes = {detect_mode(p) if self.input_mode == "auto" else self.input_mode for p in self.inputs}
        if len(modes) != 1:
            raise InputError(f"mixed input modes in one run: {sorted(modes)}")
        self.input_mode = modes.pop()
        if self.input_mode not in INPUT_MODES:
            raise InputError(f"unknown input mode {self.input_mode!r}")
        if self.input_mode == "scenario" and len(self.inputs) != 1:
            raise InputError("scenario mode takes exactly one scenario file")


def gather_points(run: PipelineRun):
    """Detections for the run's input mode, plus per-cluster fit records."""
    config, mode = run.config, run.input_mode
    fits = []
    if mode == "points":
        points = []
        for path in run.inputs:
            with stage("survey_frame"):
                points.extend(parse_points_csv(read_text(path), path=path))
        return points, fits
    if mode == "scenario":
        with stage("synthetic_oracle"):
            scenario = load_scenario(run.inputs[0], config)
            return scenario.detections(run.seed), fits
    clusters = []
    with stage("cluster_extract"):
        for path in run.inputs:
            if mode == "clusters":
                clusters.extend(load_clusters(path))
            else:
                clusters.extend(extract_clusters(load_grid(path)))
    with stage("hyperbola_fit"):
        points, fits = detections_from_clusters(clusters, config, strict=run.strict)
    return points, fits


def run_pipeline(run: PipelineRun):
    """Execute a run; every output is written only once all stages succeed."""
    points, fits = gather_points(run)
    if not points:
        log.warning("no detected points; the cable map is empty")
        cable_map, summary = CableMap(), {"n_points": 0, "n_traces": 0, "n_cables": 0, "trace_lengths": []}
    else:
        cable_map, summary = locate_cables(points, run.config)
    report = {"input_mode": run.input_mode, **summary, "hyperbola_fits": fits}
    outputs = {}
    if run.map_path is not None:
        outputs[run.map_path] = cable_map.to_csv() if run.map_format == "csv" else cable_map.to_json()
    if run.report_path is not None:
        outputs[run.report_path] = json.dumps(report, indent=1) + "\n"
    if run.svg_path is not None:
        from .render import render_svg

        line_xs = sorted({p.x for p in points}) or list(run.config.line_positions)
        outputs[run.svg_path] = render_svg(cable_map, points, line_xs)
    for path, text in outputs.items():
        write_atomic(path, text)
    run.artifacts = {"map": cable_map, "report": report, "points": points}
    return 0, run.artifacts

