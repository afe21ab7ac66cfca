"""Survey coordinate frame and the normalized point / map data model.

X runs across the parallel detection lines, Y along them, and Z is depth
(positive downward).  Everything downstream of hyperbola fitting works in
meters.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyInput, InvalidConfig, NonFiniteValue, ParseError


@dataclass(frozen=True)
class DetectedPoint:
    """One cable location recovered on one detection line."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise NonFiniteValue(f"non-finite coordinate in {self!r}")
        if self.z < 0:
            raise InvalidConfig(f"depth must be >= 0, got z={self.z}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class SurveyConfig:
    line_positions: tuple[float, ...] = tuple(float(x) for x in range(0, 21, 2))
    wave_speed_v: float = 0.1
    beta: float = 1.0
    theta_y: float = 0.3
    theta_z: float = 0.1
    min_trace_points: int = 3
    sample_step: float = 0.1
    # None means "same as beta"
    beta_z: float | None = None
    angle_threshold_deg: float = 60.0

    def __post_init__(self):
        lines = tuple(float(x) for x in self.line_positions)
        object.__setattr__(self, "line_positions", lines)
        if len(lines) < 2:
            raise InvalidConfig("line_positions needs at least 2 entries")
        if any(not math.isfinite(x) for x in lines):
            raise InvalidConfig("line_positions must be finite")
        if any(b <= a for a, b in zip(lines, lines[1:])):
            raise InvalidConfig("line_positions must be strictly increasing")
        if not self.wave_speed_v > 0:
            raise InvalidConfig("wave_speed_v must be > 0")
        if not self.beta > 0:
            raise InvalidConfig("beta must be > 0")
        if self.beta_z is not None and not self.beta_z > 0:
            raise InvalidConfig("beta_z must be > 0")
        if not (self.theta_y >= 0 and self.theta_z >= 0):
            raise InvalidConfig("theta_y and theta_z must be >= 0")
        if int(self.min_trace_points) != self.min_trace_points or self.min_trace_points < 1:
            raise InvalidConfig("min_trace_points must be a positive integer")
        if not self.sample_step > 0:
            raise InvalidConfig("sample_step must be > 0")
        if not 0 < self.angle_threshold_deg <= 90:
            raise InvalidConfig("angle_threshold_deg must be in (0, 90]")

    @classmethod
    def from_spacing(cls, x_start: float, x_end: float, spacing: float, **kwargs) -> "SurveyConfig":
        """Lines every `spacing` meters from `x_start` up to and including `x_end`."""
        if not spacing > 0:
            raise InvalidConfig("line spacing must be > 0")
        n = int(math.floor((x_end - x_start) / spacing + 1e-9)) + 1
        return cls(line_positions=tuple(x_start + k * spacing for k in range(n)), **kwargs)

    @property
    def beta_y(self) -> float:
        return self.beta

    @property
    def beta_depth(self) -> float:
        return self.beta if self.beta_z is None else self.beta_z

    def with_spacing(self, spacing: float) -> "SurveyConfig":
        """Re-lay the lines at a new spacing over the same first/last extent."""
        first, last = self.line_positions[0], self.line_positions[-1]
        return SurveyConfig.from_spacing(
            first, last, spacing, **{k: v for k, v in self.to_dict().items() if k != "line_positions"}
        )

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_text(self) -> str:
        lines = []
        for key, value in self.to_dict().items():
            if key == "line_positions":
                value = ", ".join(_fmt(v) for v in value)
            elif value is None:
                value = "none"
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"


def _fmt(v: float) -> str:
    return repr(float(v))


def read_key_values(text: str, path=None) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw!r}", line=lineno, path=path)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ParseError("empty key", line=lineno, path=path)
        out[key] = value
    return out


_INT_KEYS = {"min_trace_points"}
_LIST_KEYS = {"line_positions"}


def config_from_mapping(values: dict[str, str], base: SurveyConfig | None = None) -> SurveyConfig:
    """Build a SurveyConfig from string values, overriding `base`."""
    base = base or SurveyConfig()
    known = {f.name for f in fields(SurveyConfig)}
    updates = {}
    spacing = None
    for key, value in values.items():
        if key == "line_spacing":
            spacing = _to_float(key, value)
            continue
        if key not in known:
            raise InvalidConfig(f"unknown config key {key!r}")
        if key in _LIST_KEYS:
            updates[key] = tuple(_to_float(key, v) for v in value.split(",") if v.strip())
        elif key in _INT_KEYS:
            try:
                updates[key] = int(value)
            except ValueError:
                raise InvalidConfig(f"{key} must be an integer, got {value!r}") from None
        elif key == "beta_z" and value.lower() in ("", "none"):
            updates[key] = None
        else:
            updates[key] = _to_float(key, value)
    cfg = replace(base, **updates)
    if spacing is not None:
        cfg = cfg.with_spacing(spacing)
    return cfg


def _to_float(key, value) -> float:
    try:
        return float(value)
    except ValueError:
        raise InvalidConfig(f"{key} must be a number, got {value!r}") from None


def load_config(path, base: SurveyConfig | None = None) -> SurveyConfig:
    text = Path(path).read_text(encoding="utf-8")
    return config_from_mapping(read_key_values(text, path=path), base=base)


def normalize_points(raw: Sequence[DetectedPoint]) -> list[DetectedPoint]:
    """Sort detections by x, keeping same-line points in ingestion order."""
    if len(raw) == 0:
        raise EmptyInput("no detected points")
    for p in raw:
        if not all(math.isfinite(v) for v in (p.x, p.y, p.z)):
            raise NonFiniteValue(f"non-finite coordinate in {p!r}")
    return sorted(raw, key=lambda p: p.x)


def read_points_csv(path) -> list[DetectedPoint]:
    """Read an ``x,y,z`` CSV of detected points."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_points_csv(text, path=path)


def parse_points_csv(text: str, path=None) -> list[DetectedPoint]:
    rows = csv.reader(io.StringIO(text))
    points = []
    header_seen = False
    for lineno, row in enumerate(rows, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if not header_seen:
            if [c.strip() for c in row] != ["x", "y", "z"]:
                raise ParseError(f"expected header 'x,y,z', got {row!r}", line=lineno, path=path)
            header_seen = True
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 columns, got {len(row)}", line=lineno, path=path)
        try:
            x, y, z = (float(c) for c in row)
        except ValueError:
            raise ParseError(f"non-numeric value in {row!r}", line=lineno, path=path) from None
        if not all(math.isfinite(v) for v in (x, y, z)):
            raise ParseError(f"non-finite value in {row!r}", line=lineno, path=path)
        if z < 0:
            raise ParseError(f"negative depth in {row!r}", line=lineno, path=path)
        points.append(DetectedPoint(x, y, z))
    return points


def points_to_csv(points: Iterable[DetectedPoint]) -> str:
    buf = io.StringIO()
    buf.write("x,y,z\n")
    for p in points:
        buf.write(f"{_fmt(p.x)},{_fmt(p.y)},{_fmt(p.z)}\n")
    return buf.getvalue()


@dataclass(frozen=True)
class CableRecord:
    """Sampled GP curves and corridor half-widths for one cable."""

    cable_id: int
    x: np.ndarray
    mean_y: np.ndarray
    mean_z: np.ndarray
    halfwidth_y: np.ndarray
    halfwidth_z: np.ndarray

    @property
    def samples(self) -> list[tuple[float, float, float, float, float]]:
        return [
            tuple(float(v) for v in row)
            for row in zip(self.x, self.mean_y, self.mean_z, self.halfwidth_y, self.halfwidth_z)
        ]

    def interpolate(self, xs) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Linearly interpolated (mean_y, mean_z, hw_y, hw_z) at `xs`."""
        xs = np.asarray(xs, dtype=float)
        return tuple(
            np.interp(xs, self.x, col)
            for col in (self.mean_y, self.mean_z, self.halfwidth_y, self.halfwidth_z)
        )

    def to_json_obj(self) -> dict:
        return {
            "cable_id": int(self.cable_id),
            "samples": [
                {"x": x, "y": y, "z": z, "hw_y": hy, "hw_z": hz}
                for x, y, z, hy, hz in self.samples
            ],
        }

    @classmethod
    def from_json_obj(cls, obj) -> "CableRecord":
        s = obj["samples"]
        col = lambda k: np.array([float(r[k]) for r in s], dtype=float)  # noqa: E731
        return cls(int(obj["cable_id"]), col("x"), col("y"), col("z"), col("hw_y"), col("hw_z"))


@dataclass(frozen=True)
class CableMap:
    records: tuple[CableRecord, ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.records)

    def to_json(self) -> str:
        return json.dumps([r.to_json_obj() for r in self.records], indent=1) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("cable_id,x,y,z,hw_y,hw_z\n")
        for r in self.records:
            for row in r.samples:
                buf.write(f"{r.cable_id}," + ",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_json(cls, text: str, path=None) -> "CableMap":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=exc.lineno, path=path) from None
        try:
            return cls(tuple(CableRecord.from_json_obj(o) for o in data))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed cable map: {exc}", path=path) from None
