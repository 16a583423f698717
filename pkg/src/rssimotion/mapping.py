"""2D excess-attenuation maps from receiver sweeps.

Each sweep point contributes the difference between the free-space
prediction for its AP distance and the median RSSI it observed. Points are
binned into square cells by floor division; several points in one cell are
merged with a median.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from rssimotion.core import RssiSample
from rssimotion.errors import DomainError, ValidationError
from rssimotion.propagation import PathLossModel, expected_rssi

DEFAULT_CELL_SIZE_M = 0.5
RENDER_FORMATS = ("csv", "pgm")

# points sitting on a cell edge within this fraction of a cell go to the upper cell
_EDGE_EPS = 1e-9


@dataclass(frozen=True)
class SweepPoint:
    x_m: float
    y_m: float
    trace: tuple[RssiSample, ...]
    ap_x_m: float
    ap_y_m: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "trace", tuple(self.trace))
        if not self.trace:
            raise ValidationError(f"sweep point ({self.x_m}, {self.y_m}) has an empty trace")
        if (self.x_m, self.y_m) == (self.ap_x_m, self.ap_y_m):
            raise ValidationError(f"sweep point ({self.x_m}, {self.y_m}) coincides with its AP")

    @property
    def distance_m(self) -> float:
        return math.hypot(self.x_m - self.ap_x_m, self.y_m - self.ap_y_m)


@dataclass(frozen=True)
class AttenuationMap:
    """Grid of excess attenuation in dB; ``cells[row, col]`` is NaN where no point landed.

    Row 0 is the lowest y. Cell ``(col, row)`` covers
    ``[origin_x + col*size, origin_x + (col+1)*size)`` and likewise in y.
    """

    origin_x_m: float
    origin_y_m: float
    cell_size_m: float
    cells: np.ndarray

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    def get(self, col: int, row: int) -> float | None:
        value = self.cells[row, col]
        return None if math.isnan(value) else float(value)

    def present(self):
        """Yield ``(col, row, excess_db)`` for covered cells, row-major from the bottom."""
        for row, col in zip(*np.nonzero(~np.isnan(self.cells))):
            yield int(col), int(row), float(self.cells[row, col])

    def cell_center(self, col: int, row: int) -> tuple[float, float]:
        return (self.origin_x_m + (col + 0.5) * self.cell_size_m,
                self.origin_y_m + (row + 0.5) * self.cell_size_m)

    def cell_of(self, x_m: float, y_m: float) -> tuple[int, int]:
        return (_bin(x_m - self.origin_x_m, self.cell_size_m),
                _bin(y_m - self.origin_y_m, self.cell_size_m))


def _bin(offset: float, size: float) -> int:
    return math.floor(offset / size + _EDGE_EPS)


def excess_attenuation(point: SweepPoint, model: PathLossModel) -> float:
    """Loss beyond the free-space prediction at ``point``; positive means extra loss."""
    distance = point.distance_m
    if distance < model.d0_m:
        raise DomainError(f"receiver at ({point.x_m}, {point.y_m}) is {distance:.3f} m from its AP, "
                          f"inside the reference distance {model.d0_m} m")
    observed = statistics.median(s.rssi_dbm for s in point.trace)
    return expected_rssi(model, distance, 0.0) - observed


def build_map(points: Sequence[SweepPoint], model: PathLossModel,
              cell_size_m: float = DEFAULT_CELL_SIZE_M) -> AttenuationMap:
    if not points:
        raise ValidationError("build_map needs at least one sweep point")
    if not (math.isfinite(cell_size_m) and cell_size_m > 0):
        raise ValidationError(f"cell_size_m must be > 0, got {cell_size_m!r}")
    min_x = min(p.x_m for p in points)
    min_y = min(p.y_m for p in points)
    binned: dict[tuple[int, int], list[float]] = {}
    for p in points:
        # index relative to the bounding-box corner, shifted by the one-cell pad
        key = (_bin(p.x_m - min_x, cell_size_m) + 1, _bin(p.y_m - min_y, cell_size_m) + 1)
        binned.setdefault(key, []).append(excess_attenuation(p, model))
    width = max(c for c, _ in binned) + 2
    height = max(r for _, r in binned) + 2
    cells = np.full((height, width), np.nan)
    for (col, row), values in binned.items():
        cells[row, col] = statistics.median(values)
    return AttenuationMap(min_x - cell_size_m, min_y - cell_size_m, cell_size_m, cells)


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def render_map(amap: AttenuationMap, fmt: str) -> bytes:
    """Serialise a map as ``csv`` (one row per covered cell) or binary ``pgm`` (P5).

    CSV coordinates are cell centres. In the PGM the top row is the highest y;
    uncovered cells are 0 and covered cells scale linearly from 0 dB to the
    map maximum at 255 (negative excess clamps to 0).
    """
    if fmt == "csv":
        lines = ["x_m,y_m,excess_db"]
        for col, row, value in amap.present():
            x, y = amap.cell_center(col, row)
            lines.append(f"{x:.3f},{y:.3f},{value:.2f}")
        return ("\n".join(lines) + "\n").encode("ascii")
    if fmt == "pgm":
        values = amap.cells
        present = ~np.isnan(values)
        peak = float(values[present].max()) if present.any() else 0.0
        pixels = np.zeros(values.shape, dtype=np.uint8)
        if peak > 0:
            for row, col in zip(*np.nonzero(present)):
                scaled = max(0.0, float(values[row, col])) / peak * 255.0
                pixels[row, col] = min(255, _round_half_up(scaled))
        header = f"P5\n{amap.width} {amap.height}\n255\n".encode("ascii")
        return header + np.flipud(pixels).tobytes()
    raise ValidationError(f"unknown map format {fmt!r}; valid formats: {', '.join(RENDER_FORMATS)}")
