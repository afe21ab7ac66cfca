"""Point clusters for hyperbola fitting.

Clusters either come from a JSON cluster file or from a deliberately
simple extractor: threshold the B-scan, label connected components, and
keep the ones that open downward (apex strictly inside the component's
lateral extent).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import InvalidCluster, InvalidGrid, ParseError, TooFewSamples
from .frame import read_key_values

MIN_FIT_SAMPLES = 5


@dataclass(frozen=True, eq=False)
class PointCluster:
    """(y [m], t [ns]) samples of a single candidate hyperbolic signature."""

    samples: np.ndarray
    source_line_x: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2 or (s.size and s.shape[1] != 2):
            s = s.reshape(-1, 2)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        if len(s) < MIN_FIT_SAMPLES:
            raise TooFewSamples(f"cluster has {len(s)} samples, need >= {MIN_FIT_SAMPLES}")
        if not np.all(np.isfinite(s)):
            raise InvalidCluster("cluster samples must be finite")
        if np.any(s[:, 1] <= 0):
            raise InvalidCluster("travel times must be > 0")
        if not math.isfinite(self.source_line_x):
            raise InvalidCluster("source_line_x must be finite")

    @property
    def y(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def t(self) -> np.ndarray:
        return self.samples[:, 1]

    def __len__(self):
        return len(self.samples)

    def to_json_obj(self) -> dict:
        return {"line_x": float(self.source_line_x), "samples": self.samples.tolist()}


@dataclass(frozen=True, eq=False)
class BScanGrid:
    """Row-major amplitude image: rows are time samples, columns are traces."""

    amplitude: np.ndarray
    dt: float
    dy: float
    line_x: float = 0.0

    def __post_init__(self):
        amp = np.asarray(self.amplitude, dtype=float)
        if amp.ndim != 2:
            raise InvalidGrid(f"amplitude must be 2-D, got shape {amp.shape}")
        if amp.shape[0] < 2 or amp.shape[1] < 2:
            raise InvalidGrid(f"grid must be at least 2x2, got {amp.shape}")
        if not (self.dt > 0 and self.dy > 0):
            raise InvalidGrid("dt and dy must be > 0")
        if not np.all(np.isfinite(amp)):
            raise InvalidGrid("amplitude must be finite everywhere")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitude", amp)

    @property
    def rows(self) -> int:
        return self.amplitude.shape[0]

    @property
    def cols(self) -> int:
        return self.amplitude.shape[1]


_STRUCTURES = {
    4: ndimage.generate_binary_structure(2, 1),
    8: ndimage.generate_binary_structure(2, 2),
}


def extract_clusters(grid, threshold=None, min_cluster_size=MIN_FIT_SAMPLES, connectivity=4):
    """Threshold + connected components stand-in for a hyperbola extractor.

    Parameters
    ----------
    grid : BScanGrid
    threshold : float, optional
        Absolute amplitude cut-off.  Defaults to half the grid's peak
        absolute amplitude.
    min_cluster_size : int
        Components with fewer cells are dropped.  Must be >= 5.
    connectivity : {4, 8}

    Returns
    -------
    list of PointCluster
        Ordered by the component's leftmost column; samples sorted by
        (y, t).  Cells in row 0 (t = 0) are never emitted.
    """
    if not isinstance(grid, BScanGrid):
        raise InvalidGrid("expected a BScanGrid")
    if min_cluster_size < MIN_FIT_SAMPLES:
        raise InvalidGrid(f"min_cluster_size must be >= {MIN_FIT_SAMPLES}")
    if connectivity not in _STRUCTURES:
        raise InvalidGrid("connectivity must be 4 or 8")
    amp = np.abs(grid.amplitude)
    if threshold is None:
        threshold = 0.5 * float(amp.max())
    mask = amp >= threshold
    if threshold <= 0:
        # a non-positive cut would select the whole grid as one blob
        mask &= amp > 0
    mask[0, :] = False
    labels, n = ndimage.label(mask, structure=_STRUCTURES[connectivity])
    if n == 0:
        return []
    clusters = []
    for sl, label in zip(ndimage.find_objects(labels), range(1, n + 1)):
        rows, cols = np.nonzero(labels[sl] == label)
        if len(rows) < min_cluster_size:
            continue
        rows = rows + sl[0].start
        cols = cols + sl[1].start
        if not _opens_downward(rows, cols):
            continue
        order = np.lexsort((rows, cols))
        samples = np.column_stack([cols[order] * grid.dy, rows[order] * grid.dt])
        clusters.append((int(cols.min()), PointCluster(samples, grid.line_x)))
    clusters.sort(key=lambda item: item[0])
    return [c for _, c in clusters]


def _opens_downward(rows, cols) -> bool:
    """Apex row must not touch the component's lateral boundary."""
    top = rows.min()
    apex_cols = cols[rows == top]
    return bool(apex_cols.min() > cols.min() and apex_cols.max() < cols.max())


def apex_cell(cluster: PointCluster) -> tuple[float, float]:
    """Centroid (y, t) of the minimum-t samples of a cluster."""
    t_min = cluster.t.min()
    at_top = cluster.t == t_min
    return float(cluster.y[at_top].mean()), float(t_min)


def load_clusters(path) -> list[PointCluster]:
    """Read a JSON cluster file: ``[{"line_x": x, "samples": [[y, t], ...]}, ...]``."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_clusters(text, path=path)


def parse_clusters(text: str, path=None) -> list[PointCluster]:
    if not text.strip():
        return []
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, path=path) from None
    if not isinstance(data, list):
        raise ParseError("cluster file must hold a JSON array", line=1, path=path)
    clusters = []
    for idx, obj in enumerate(data):
        try:
            line_x = float(obj["line_x"])
            samples = np.array(obj["samples"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"cluster #{idx}: malformed entry ({exc})", path=path) from None
        if samples.size == 0:
            samples = samples.reshape(0, 2)
        if samples.ndim != 2 or samples.shape[1] != 2:
            raise ParseError(f"cluster #{idx}: samples must be [y, t] pairs", path=path)
        try:
            clusters.append(PointCluster(samples, line_x))
        except TooFewSamples as exc:
            raise TooFewSamples(f"cluster #{idx} (line_x={line_x:g}): {exc}") from None
        except InvalidCluster as exc:
            raise InvalidCluster(f"cluster #{idx} (line_x={line_x:g}): {exc}") from None
    return clusters


def clusters_to_json(clusters) -> str:
    return json.dumps([c.to_json_obj() for c in clusters], indent=1) + "\n"


def grid_sidecar_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.name + ".meta")


def load_grid(csv_path, meta_path=None) -> BScanGrid:
    """Read a B-scan CSV matrix plus its ``dt``/``dy``/``line_x`` sidecar."""
    csv_path = Path(csv_path)
    meta_path = Path(meta_path) if meta_path is not None else grid_sidecar_path(csv_path)
    meta = read_key_values(meta_path.read_text(encoding="utf-8"), path=meta_path)
    try:
        dt = float(meta["dt"])
        dy = float(meta["dy"])
        line_x = float(meta.get("line_x", 0.0))
    except KeyError as exc:
        raise ParseError(f"missing key {exc.args[0]!r}", path=meta_path) from None
    except ValueError as exc:
        raise ParseError(str(exc), path=meta_path) from None
    rows = []
    for lineno, line in enumerate(csv_path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rows.append([float(c) for c in line.split(",")])
        except ValueError:
            raise ParseError("non-numeric grid value", line=lineno, path=csv_path) from None
        if rows and len(rows[-1]) != len(rows[0]):
            raise ParseError("ragged grid row", line=lineno, path=csv_path)
    return BScanGrid(np.array(rows, dtype=float), dt, dy, line_x)


def save_grid(grid: BScanGrid, csv_path) -> None:
    csv_path = Path(csv_path)
    np.savetxt(csv_path, grid.amplitude, delimiter=",", fmt="%.17g")
    grid_sidecar_path(csv_path).write_text(
        f"dt = {grid.dt!r}\ndy = {grid.dy!r}\nline_x = {grid.line_x!r}\n", encoding="utf-8"
    )
