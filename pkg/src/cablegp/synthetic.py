"""Ground-truth cables, noisy detections and synthetic hyperbola data."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import InvalidConfig, ParseError, SampleOutOfGrid
from .extract import BScanGrid, PointCluster
from .frame import DetectedPoint, SurveyConfig, read_key_values


@dataclass(frozen=True)
class SinusoidCurve:
    mean: float
    amplitude: float = 0.0
    period: float = 12.0
    phase: float = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.mean + self.amplitude * np.sin(2.0 * np.pi * x / self.period + self.phase)

    def to_json_obj(self):
        return {"kind": "sinusoid", "mean": self.mean, "amplitude": self.amplitude,
                "period": self.period, "phase": self.phase}


@dataclass(frozen=True)
class PolylineCurve:
    xs: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.xs) != len(self.values) or len(self.xs) < 2:
            raise InvalidConfig("polyline needs >= 2 matching xs/values")
        if any(b <= a for a, b in zip(self.xs, self.xs[1:])):
            raise InvalidConfig("polyline xs must be strictly increasing")

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.xs, self.values)

    def to_json_obj(self):
        return {"kind": "polyline", "xs": list(self.xs), "values": list(self.values)}


def _curve_from_json(obj):
    kind = obj.get("kind")
    if kind == "sinusoid":
        return SinusoidCurve(float(obj["mean"]), float(obj["amplitude"]), float(obj["period"]), float(obj["phase"]))
    if kind == "polyline":
        return PolylineCurve(tuple(map(float, obj["xs"])), tuple(map(float, obj["values"])))
    raise ParseError(f"unknown curve kind {kind!r}")


@dataclass(frozen=True)
class TruthCable:
    y_curve: SinusoidCurve | PolylineCurve
    z_curve: SinusoidCurve | PolylineCurve
    x_range: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.x_range
        if not hi > lo:
            raise InvalidConfig("x_range must be increasing")
        probe = np.linspace(lo, hi, 257)
        if np.any(self.z_curve(probe) < 0):
            raise InvalidConfig("truth depth must be >= 0 over x_range")

    def y(self, x):
        return self.y_curve(x)

    def z(self, x):
        return self.z_curve(x)

    def to_json_obj(self):
        return {"y_curve": self.y_curve.to_json_obj(), "z_curve": self.z_curve.to_json_obj(),
                "x_range": list(self.x_range)}

    @classmethod
    def from_json_obj(cls, obj):
        return cls(_curve_from_json(obj["y_curve"]), _curve_from_json(obj["z_curve"]),
                   (float(obj["x_range"][0]), float(obj["x_range"][1])))


def truths_to_json(truths) -> str:
    return json.dumps([t.to_json_obj() for t in truths], indent=1) + "\n"


def load_truths(path) -> list[TruthCable]:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
        return [TruthCable.from_json_obj(o) for o in data]
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, path=path) from None
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed truth file: {exc}", path=path) from None


def _noise(rng, sd, n, heavy_tailed):
    if sd == 0:
        return np.zeros(n)
    if heavy_tailed:
        # Student-t with 3 dof, rescaled to unit variance
        return sd * rng.standard_t(3, size=n) / math.sqrt(3.0)
    return rng.normal(0.0, sd, size=n)


def sample_detections(truth: TruthCable, config: SurveyConfig, noise_y_sd=0.0, noise_z_sd=0.0,
                      seed=0, heavy_tailed=False, rng=None) -> list[DetectedPoint]:
    """One noisy detection per line inside the truth's x-range.

    Depth noise is clipped at zero so detections stay physical.
    """
    if noise_y_sd < 0 or noise_z_sd < 0:
        raise InvalidConfig("noise standard deviations must be >= 0")
    rng = np.random.default_rng(seed) if rng is None else rng
    lo, hi = truth.x_range
    xs = np.array([x for x in config.line_positions if lo <= x <= hi], dtype=float)
    ys = truth.y(xs) + _noise(rng, noise_y_sd, len(xs), heavy_tailed)
    zs = np.maximum(truth.z(xs) + _noise(rng, noise_z_sd, len(xs), heavy_tailed), 0.0)
    return [DetectedPoint(float(x), float(y), float(z)) for x, y, z in zip(xs, ys, zs)]


def synth_cluster(apex_y, depth, v, n=50, phi_max=1.0, noise_t_sd=0.0, seed=0, line_x=0.0) -> PointCluster:
    """Samples of the hyperbola a cable at (apex_y, depth) leaves in a B-scan."""
    if not (depth > 0 and v > 0 and phi_max > 0):
        raise InvalidConfig("depth, v and phi_max must be > 0")
    if n < 5:
        raise InvalidConfig("n must be >= 5")
    t0 = 2.0 * depth / v
    return cluster_from_params(t0, v * t0 / 2.0, apex_y, n=n, phi_max=phi_max,
                               noise_t_sd=noise_t_sd, seed=seed, line_x=line_x)


def cluster_from_params(A, B, C, n=50, phi_max=1.0, noise_t_sd=0.0, seed=0, line_x=0.0) -> PointCluster:
    phi = np.linspace(-phi_max, phi_max, n)
    y = B * np.sinh(phi) + C
    t = A * np.cosh(phi)
    if noise_t_sd > 0:
        t = t + np.random.default_rng(seed).normal(0.0, noise_t_sd, size=n)
    return PointCluster(np.column_stack([y, t]), line_x)


def rasterize_cluster(cluster: PointCluster, dt, dy, rows, cols, blur=1.0, line_x=None) -> BScanGrid:
    """Binary image of a cluster, Gaussian-blurred by `blur` cells and peak-normalized."""
    amp = np.zeros((rows, cols))
    for y, t in cluster.samples:
        col = int(round(y / dy))
        row = int(round(t / dt))
        if not (0 <= row < rows and 0 <= col < cols):
            raise SampleOutOfGrid(f"sample (y={y:g}, t={t:g}) falls outside a {rows}x{cols} grid")
        amp[row, col] = 1.0
    if blur > 0:
        amp = ndimage.gaussian_filter(amp, sigma=blur, mode="constant")
        amp /= amp.max()
    return BScanGrid(amp, dt, dy, cluster.source_line_x if line_x is None else line_x)


@dataclass(frozen=True)
class Scenario:
    """Everything `simulate` needs: truth cables, survey layout and noise."""

    cables: tuple
    config: SurveyConfig
    noise_y_sd: float = 0.1
    noise_z_sd: float = 0.05
    seed: int = 0
    heavy_tailed: bool = False

    def detections(self, seed=None) -> list[DetectedPoint]:
        rng = np.random.default_rng(self.seed if seed is None else seed)
        points = []
        for cable in self.cables:
            points.extend(sample_detections(cable, self.config, self.noise_y_sd, self.noise_z_sd,
                                            heavy_tailed=self.heavy_tailed, rng=rng))
        return points


def canonical_scenario(seed, line_spacing=2.0, length=20.0, y_mean=5.0, beta=1.0,
                       theta_y=0.3, theta_z=0.1, noise_y_sd=0.1, noise_z_sd=0.05) -> Scenario:
    """One sinusoidal cable (0.5 m amplitude, 12 m period) at ~0.5 m depth, random phases."""
    rng = np.random.default_rng([seed, 0xCAB1E])
    cable = TruthCable(
        SinusoidCurve(y_mean, 0.5, 12.0, float(rng.uniform(0, 2 * np.pi))),
        SinusoidCurve(0.5, 0.05, 12.0, float(rng.uniform(0, 2 * np.pi))),
        (0.0, length),
    )
    config = SurveyConfig.from_spacing(0.0, length, line_spacing, beta=beta, theta_y=theta_y,
                                       theta_z=theta_z)
    return Scenario((cable,), config, noise_y_sd, noise_z_sd, seed)


_SCENARIO_CURVE_KEYS = ("y_mean", "y_amplitude", "y_period", "y_phase",
                        "z_mean", "z_amplitude", "z_period", "z_phase")

_SCENARIO_DEFAULTS = {
    "y_mean": "5.0", "y_amplitude": "0.5", "y_period": "12.0", "y_phase": "0.0",
    "z_mean": "0.5", "z_amplitude": "0.05", "z_period": "12.0", "z_phase": "0.0",
    "x_start": "0.0", "x_end": "20.0", "line_spacing": "2.0",
    "noise_y_sd": "0.1", "noise_z_sd": "0.05", "seed": "0", "heavy_tailed": "false",
}


def scenario_from_mapping(values: dict[str, str], base_config: SurveyConfig | None = None) -> Scenario:
    """Build a Scenario from key-value strings.

    Curve keys may hold comma-separated lists, one entry per cable; a
    single entry is broadcast to every cable.
    """
    merged = dict(_SCENARIO_DEFAULTS)
    unknown = set(values) - set(merged) - {"curve"}
    if unknown:
        raise InvalidConfig(f"unknown scenario key(s): {', '.join(sorted(unknown))}")
    merged.update(values)
    if merged.get("curve", "sinusoid") != "sinusoid":
        raise InvalidConfig("only the 'sinusoid' curve family is supported in scenario files")
    try:
        lists = {k: [float(v) for v in merged[k].split(",")] for k in _SCENARIO_CURVE_KEYS}
        x_start, x_end = float(merged["x_start"]), float(merged["x_end"])
        spacing = float(merged["line_spacing"])
        noise_y, noise_z = float(merged["noise_y_sd"]), float(merged["noise_z_sd"])
        seed = int(merged["seed"])
    except ValueError as exc:
        raise InvalidConfig(f"bad scenario value: {exc}") from None
    n_cables = max(len(v) for v in lists.values())
    for key, vals in lists.items():
        if len(vals) == 1:
            lists[key] = vals * n_cables
        elif len(vals) != n_cables:
            raise InvalidConfig(f"{key} has {len(vals)} entries, expected 1 or {n_cables}")
    cables = tuple(
        TruthCable(
            SinusoidCurve(lists["y_mean"][i], lists["y_amplitude"][i], lists["y_period"][i], lists["y_phase"][i]),
            SinusoidCurve(lists["z_mean"][i], lists["z_amplitude"][i], lists["z_period"][i], lists["z_phase"][i]),
            (x_start, x_end),
        )
        for i in range(n_cables)
    )
    base = base_config or SurveyConfig()
    config = SurveyConfig.from_spacing(
        x_start, x_end, spacing, **{k: v for k, v in base.to_dict().items() if k != "line_positions"}
    )
    heavy = merged["heavy_tailed"].strip().lower() in ("1", "true", "yes")
    return Scenario(cables, config, noise_y, noise_z, seed, heavy)


def load_scenario(path, base_config: SurveyConfig | None = None) -> Scenario:
    text = Path(path).read_text(encoding="utf-8")
    return scenario_from_mapping(read_key_values(text, path=path), base_config)
