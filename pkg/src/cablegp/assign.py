"""Group per-line detections into cable traces by direction continuity."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import groupby
from typing import Sequence

import numpy as np

from .frame import DetectedPoint, SurveyConfig

_PLUS_X = np.array([1.0, 0.0, 0.0])


@dataclass(frozen=True)
class CableTrace:
    cable_id: int
    points: tuple[DetectedPoint, ...]

    def __len__(self):
        return len(self.points)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        pts = np.array([p.as_tuple() for p in self.points], dtype=float).reshape(-1, 3)
        return pts[:, 0], pts[:, 1], pts[:, 2]

    def to_json_obj(self) -> dict:
        return {"cable_id": self.cable_id, "points": [list(p.as_tuple()) for p in self.points]}


def traces_to_json(traces) -> str:
    return json.dumps([t.to_json_obj() for t in traces], indent=1) + "\n"


def _heading(trace_pts: list[DetectedPoint]) -> np.ndarray:
    """Unit direction of the trace's last segment; +X for a fresh trace."""
    if len(trace_pts) < 2:
        return _PLUS_X
    a, b = np.array(trace_pts[-2].as_tuple()), np.array(trace_pts[-1].as_tuple())
    d = b - a
    return d / np.linalg.norm(d)


def continuity_cosine(trace_pts: list[DetectedPoint], candidate: DetectedPoint) -> float:
    """Cosine between the trace heading and the step to `candidate`."""
    step = np.array(candidate.as_tuple()) - np.array(trace_pts[-1].as_tuple())
    norm = np.linalg.norm(step)
    if norm == 0:
        return -1.0
    return float(_heading(trace_pts) @ step / norm)


def match_line(open_traces: list[list[DetectedPoint]], line_points: list[DetectedPoint], min_cos: float):
    """Greedy best-cosine-first matching of one line's points to open traces.

    Returns ``{point_index: trace_index}``.  Ties in cosine break on the
    point's (y, z) and then the trace index, never on input order.
    """
    edges = []
    for ti, tr in enumerate(open_traces):
        for pi, p in enumerate(line_points):
            c = continuity_cosine(tr, p)
            if c >= min_cos:
                edges.append((-c, p.y, p.z, ti, pi))
    edges.sort()
    used_traces, matched = set(), {}
    for _, _, _, ti, pi in edges:
        if ti in used_traces or pi in matched:
            continue
        used_traces.add(ti)
        matched[pi] = ti
    return matched


def assign_points(points: Sequence[DetectedPoint], config: SurveyConfig | None = None,
                  angle_threshold_deg: float | None = None) -> list[CableTrace]:
    """Partition x-sorted detections into traces, processing lines in x order.

    A point extends the trace whose heading it continues best, provided the
    turning angle stays within `angle_threshold_deg`; otherwise it opens a
    new trace heading +X (perpendicular to the detection lines).
    """
    if angle_threshold_deg is None:
        angle_threshold_deg = config.angle_threshold_deg if config is not None else 60.0
    if not 0 < angle_threshold_deg <= 90:
        raise ValueError("angle_threshold_deg must be in (0, 90]")
    min_cos = math.cos(math.radians(angle_threshold_deg)) - 1e-12
    if any(b.x < a.x for a, b in zip(points, points[1:])):
        raise ValueError("points must be sorted by x (see normalize_points)")

    traces: list[list[DetectedPoint]] = []
    for _, group in groupby(points, key=lambda p: p.x):
        line_points = sorted(group, key=lambda p: (p.y, p.z))
        matched = match_line(traces, line_points, min_cos)
        for pi, ti in matched.items():
            traces[ti].append(line_points[pi])
        for pi, p in enumerate(line_points):
            if pi not in matched:
                traces.append([p])
    return [CableTrace(i + 1, tuple(tr)) for i, tr in enumerate(traces)]


def prune_short(traces: Sequence[CableTrace], min_trace_points: int) -> list[CableTrace]:
    """Drop traces with fewer than `min_trace_points` points and renumber from 1."""
    if min_trace_points < 1:
        raise ValueError("min_trace_points must be >= 1")
    kept = [t for t in traces if len(t.points) >= min_trace_points]
    return [CableTrace(i + 1, t.points) for i, t in enumerate(kept)]
