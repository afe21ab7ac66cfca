import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cablegp.assign import CableTrace
from cablegp.errors import LengthMismatch, OutOfRange, TooFewPoints
from cablegp.evaluation import (average_error, baseline_linear, baseline_spline, coverage_rate,
                                evaluate_map, format_table, reports_to_json)
from cablegp.frame import CableMap, CableRecord, DetectedPoint
from cablegp.gp import fit_cable
from cablegp.synthetic import PolylineCurve, SinusoidCurve, TruthCable

from harness import canonical_trace, method_errors


def trace_of(*pts):
    return CableTrace(1, tuple(DetectedPoint(*p) for p in pts))


def record_from(truth, xs, hw=0.1, shift=0.0):
    xs = np.asarray(xs, dtype=float)
    return CableRecord(1, xs, truth.y(xs) + shift, truth.z(xs) + shift, np.full_like(xs, hw), np.full_like(xs, hw))


TRUTH = TruthCable(SinusoidCurve(5.0, 0.5, 12.0, 0.0), SinusoidCurve(0.5, 0.05, 12.0, 0.0), (0.0, 20.0))


def test_average_error_examples():
    assert average_error([1, 2, 3], [1, 2, 3]) == 0
    assert average_error([1, 3], [2, 5]) == 1.5
    assert average_error([0.5], [0.42]) == pytest.approx(0.08)
    with pytest.raises(LengthMismatch):
        average_error([1, 2], [1])
    with pytest.raises(LengthMismatch):
        average_error([], [])


@given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=1, max_size=20),
       st.floats(-10, 10))
def test_average_error_scaling(pairs, a):
    c, m = np.array(pairs).T
    assert average_error(a * c, a * m) == pytest.approx(abs(a) * average_error(c, m), rel=1e-9, abs=1e-9)
    assert average_error(c, m) == pytest.approx(average_error(m, c))


def test_coverage_examples():
    xs = np.linspace(0, 20, 41)
    assert coverage_rate(record_from(TRUTH, xs), TRUTH, xs) == 1.0
    assert coverage_rate(record_from(TRUTH, xs, hw=0.1, shift=0.5), TRUTH, xs) == 0.0
    with pytest.raises(OutOfRange):
        coverage_rate(record_from(TRUTH, xs), TRUTH, [21.0])


def test_linear_baseline():
    tr = trace_of((0, 2, 0.4), (2, 4, 0.6))
    assert baseline_linear(tr, 1.0) == pytest.approx((3.0, 0.5))
    assert baseline_linear(tr, 2.0) == (4.0, 0.6)
    with pytest.raises(OutOfRange):
        baseline_linear(tr, 2.5)


def test_spline_baseline():
    tr = trace_of((0, 1, 0.4), (2, 3, 0.5), (4, 5, 0.6))
    assert baseline_spline(tr, 2.0) == pytest.approx((3.0, 0.5), abs=1e-12)
    assert baseline_spline(tr, 1.0) == pytest.approx((2.0, 0.45), abs=1e-12)
    curved = trace_of((0, 1, 0.4), (2, 3, 0.9), (4, 2, 0.2), (6, 0, 0.5))
    for x, y, z in [(0, 1, 0.4), (2, 3, 0.9), (4, 2, 0.2), (6, 0, 0.5)]:
        assert baseline_spline(curved, x) == pytest.approx((y, z), abs=1e-12)
    with pytest.raises(TooFewPoints):
        baseline_spline(trace_of((0, 1, 0.4), (2, 3, 0.5)), 1.0)


def test_evaluate_map_and_outputs():
    xs = np.linspace(0, 20, 201)
    other = TruthCable(PolylineCurve((0.0, 20.0), (9.0, 9.0)), PolylineCurve((0.0, 20.0), (0.4, 0.4)), (0, 20))
    cmap = CableMap([record_from(TRUTH, xs, shift=0.01)])
    ((cid, rep),) = evaluate_map(cmap, [other, TRUTH], list(range(0, 21, 2)), seed=1)
    assert cid == 1
    assert rep.n_eval_points == 11 + 20
    assert rep.avg_position_error == pytest.approx(0.01, abs=1e-3)
    assert rep.coverage_rate == 1.0
    assert evaluate_map(cmap, [TRUTH], range(0, 21, 2), seed=1) == evaluate_map(cmap, [TRUTH], range(0, 21, 2), seed=1)
    assert '"avg_depth_error"' in reports_to_json([(cid, rep)])
    table = format_table([(cid, rep)]).splitlines()
    assert len({len(line) for line in table}) == 1


# -- Monte-Carlo comparisons on the canonical sinusoid scenario --------------

def test_gp_map_beats_raw_points_and_covers_truth():
    gp_sq, raw_sq, inside, total = 0.0, 0.0, 0, 0
    for seed in range(200):
        sc, trace = canonical_trace(seed)
        record = fit_cable(trace, sc.config)
        xs, ys, _ = trace.arrays()
        truth = sc.cables[0]
        gp_sq += float(np.sum((record.interpolate(xs)[0] - truth.y(xs)) ** 2))
        raw_sq += float(np.sum((ys - truth.y(xs)) ** 2))
        grid = record.x
        inside += int(np.sum((np.abs(truth.y(grid) - record.mean_y) <= record.halfwidth_y)
                             & (np.abs(truth.z(grid) - record.mean_z) <= record.halfwidth_z)))
        total += len(grid)
    assert gp_sq < raw_sq
    assert inside / total >= 0.90


def test_gp_does_not_interpolate_noisy_points():
    sc, trace = canonical_trace(0)
    record = fit_cable(trace, sc.config)
    xs, ys, _ = trace.arrays()
    assert np.max(np.abs(record.interpolate(xs)[0] - ys)) > 1e-6


def mean_errors(spacing, beta):
    return np.mean([method_errors(seed, spacing, beta) for seed in range(200)], axis=0)


def test_straight_segments_lose_to_gp_at_three_metres():
    # kernel length-scale 2 m: see the acceptance suite for the beta = 1 numbers
    gp, line, _ = mean_errors(3.0, 2.0)
    assert line > gp


def test_spline_loses_to_gp_on_dense_lines():
    gp, _, spline = mean_errors(1.0, 1.0)
    assert spline > gp
