"""Accuracy metrics and the straight-segment / cubic-spline baselines."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .assign import CableTrace
from .errors import LengthMismatch, OutOfRange, TooFewPoints
from .frame import CableMap, CableRecord

N_RANDOM_EVAL = 20
_RANGE_SLACK = 1e-9


def average_error(calculated, measured) -> float:
    """Mean absolute difference between calculated and measured values."""
    calculated = np.asarray(calculated, dtype=float)
    measured = np.asarray(measured, dtype=float)
    if calculated.shape != measured.shape:
        raise LengthMismatch(f"{calculated.shape} vs {measured.shape}")
    if calculated.size == 0:
        raise LengthMismatch("need at least one value")
    return float(np.mean(np.abs(calculated - measured)))


def _check_range(xs, lo, hi):
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    slack = _RANGE_SLACK * max(1.0, abs(hi - lo))
    if np.any(xs < lo - slack) or np.any(xs > hi + slack):
        raise OutOfRange(f"x outside [{lo:g}, {hi:g}]")
    return xs


def coverage_rate(record: CableRecord, truth, eval_xs) -> float:
    """Fraction of `eval_xs` where the truth lies inside the corridor on both axes."""
    xs = _check_range(eval_xs, record.x[0], record.x[-1])
    my, mz, hy, hz = record.interpolate(xs)
    inside = (np.abs(truth.y(xs) - my) <= hy) & (np.abs(truth.z(xs) - mz) <= hz)
    return float(np.mean(inside))


def baseline_linear(trace: CableTrace, x_star):
    """Straight segments between consecutive detections."""
    xs, ys, zs = trace.arrays()
    xq = _check_range(x_star, xs[0], xs[-1])
    y, z = np.interp(xq, xs, ys), np.interp(xq, xs, zs)
    if np.ndim(x_star) == 0:
        return float(y[0]), float(z[0])
    return y, z


def baseline_spline(trace: CableTrace, x_star):
    """Natural cubic spline through the detections, per axis."""
    if len(trace.points) < 3:
        raise TooFewPoints("spline baseline needs >= 3 points")
    xs, ys, zs = trace.arrays()
    xq = _check_range(x_star, xs[0], xs[-1])
    y = CubicSpline(xs, ys, bc_type="natural")(xq)
    z = CubicSpline(xs, zs, bc_type="natural")(xq)
    if np.ndim(x_star) == 0:
        return float(y[0]), float(z[0])
    return y, z


@dataclass(frozen=True)
class ErrorReport:
    avg_depth_error: float
    avg_position_error: float
    coverage_rate: float
    n_eval_points: int
    # the same split at detection lines / random points
    line_depth_error: float = float("nan")
    line_position_error: float = float("nan")
    random_depth_error: float = float("nan")
    random_position_error: float = float("nan")

    def to_json_obj(self) -> dict:
        return asdict(self)


def eval_positions(record: CableRecord, line_positions, rng, n_random=N_RANDOM_EVAL):
    """Detection lines inside the record's range plus `n_random` uniform x."""
    lo, hi = float(record.x[0]), float(record.x[-1])
    lines = np.array([x for x in line_positions if lo - _RANGE_SLACK <= x <= hi + _RANGE_SLACK])
    randoms = np.sort(rng.uniform(lo, hi, size=n_random)) if n_random else np.empty(0)
    return lines, randoms


def evaluate_record(record: CableRecord, truth, line_xs, random_xs) -> ErrorReport:
    line_xs = np.asarray(line_xs, dtype=float)
    random_xs = np.asarray(random_xs, dtype=float)
    all_xs = np.concatenate([line_xs, random_xs])
    _check_range(all_xs, record.x[0], record.x[-1])

    def errs(xs):
        if len(xs) == 0:
            return float("nan"), float("nan")
        my, mz, _, _ = record.interpolate(xs)
        return average_error(mz, truth.z(xs)), average_error(my, truth.y(xs))

    d_all, p_all = errs(all_xs)
    d_line, p_line = errs(line_xs)
    d_rand, p_rand = errs(random_xs)
    return ErrorReport(d_all, p_all, coverage_rate(record, truth, all_xs), len(all_xs),
                       d_line, p_line, d_rand, p_rand)


def match_truth(record: CableRecord, truths):
    """Truth cable closest (mean |dy| + |dz|) to the record over its range."""
    best, best_cost = None, np.inf
    for truth in truths:
        cost = np.mean(np.abs(truth.y(record.x) - record.mean_y) + np.abs(truth.z(record.x) - record.mean_z))
        if cost < best_cost:
            best, best_cost = truth, cost
    return best


def evaluate_map(cable_map: CableMap, truths, line_positions, seed=0, n_random=N_RANDOM_EVAL):
    """Per-cable ErrorReports, each record scored against its nearest truth cable."""
    rng = np.random.default_rng(seed)
    out = []
    for record in cable_map.records:
        lines, randoms = eval_positions(record, line_positions, rng, n_random)
        out.append((record.cable_id, evaluate_record(record, match_truth(record, truths), lines, randoms)))
    return out


def reports_to_json(reports) -> str:
    return json.dumps([{"cable_id": cid, **rep.to_json_obj()} for cid, rep in reports], indent=1) + "\n"


def format_table(reports) -> str:
    """Aligned text table: depth/position errors (cm) at lines, random points, altogether."""
    head = ("cable", "line depth", "line pos", "rand depth", "rand pos", "all depth", "all pos", "coverage")
    rows = [head]
    for cid, r in reports:
        cm = lambda v: f"{100 * v:.2f}"  # noqa: E731
        rows.append((str(cid), cm(r.line_depth_error), cm(r.line_position_error),
                     cm(r.random_depth_error), cm(r.random_position_error),
                     cm(r.avg_depth_error), cm(r.avg_position_error), f"{r.coverage_rate:.3f}"))
    widths = [max(len(row[i]) for row in rows) for i in range(len(head))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in rows]
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines) + "\n"
