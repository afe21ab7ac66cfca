"""Buried-cable mapping from GPR detections.

Hyperbola fitting turns B-scan point clusters into per-line detections,
direction-continuity clustering groups them into cable traces, and
per-axis Gaussian-process regression gives each cable a most-likely curve
with a +-2 sigma corridor.
"""

__version__ = "0.1.0"

from .assign import CableTrace, assign_points, prune_short
from .extract import BScanGrid, PointCluster, extract_clusters, load_clusters
from .frame import CableMap, CableRecord, DetectedPoint, SurveyConfig, normalize_points
from .gp import GpModel, Prediction, fit_cable, fit_map, gp_fit, gp_predict, kernel
from .hyperbola import (FitReport, HyperbolaParams, algebraic_init, apex_to_detection, fit_cluster,
                        nearest_param, orthogonal_refine)
from .evaluation import (ErrorReport, average_error, baseline_linear, baseline_spline, coverage_rate,
                         evaluate_map)
from .pipeline import PipelineRun, locate_cables, run_pipeline
from .synthetic import TruthCable, canonical_scenario, sample_detections, synth_cluster

__all__ = [
    "BScanGrid", "CableMap", "CableRecord", "CableTrace", "DetectedPoint", "FitReport", "GpModel",
    "HyperbolaParams", "PointCluster", "Prediction", "SurveyConfig", "algebraic_init",
    "apex_to_detection", "assign_points", "extract_clusters", "fit_cable", "fit_cluster", "fit_map",
    "gp_fit", "gp_predict", "kernel", "load_clusters", "nearest_param", "normalize_points",
    "orthogonal_refine", "prune_short",
    "ErrorReport", "average_error", "baseline_linear", "baseline_spline", "coverage_rate", "evaluate_map",
    "PipelineRun", "locate_cables", "run_pipeline",
    "TruthCable", "canonical_scenario", "sample_detections", "synth_cluster",
]
