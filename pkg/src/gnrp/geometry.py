"""Geometry on the unit torus [0, 1)^2.

Wrapped (min-image) distances, square cell grids with explicit rounding
modes, point-to-cell assignment, and the boustrophedon ("snake") cell
ordering used by the constructive Hamiltonicity routine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

# Guards float noise when 1/target_side is integral (e.g. 0.05 -> 19.9999...).
_EPS = 1e-9


class GridMode(Enum):
    # cell side must not exceed the target (diameter-style bounds)
    AT_MOST = "at_most"
    # cell side must be at least the target (separation-style bounds)
    AT_LEAST = "at_least"


@dataclass(frozen=True)
class TorusPoint:
    """A point on the unit torus; construction wraps coordinates into [0, 1)."""

    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", _wrap01(self.x))
        object.__setattr__(self, "y", _wrap01(self.y))


def _wrap01(v: float) -> float:
    w = float(v) % 1.0
    # Python's % can round up to 1.0 for tiny negative inputs.
    return 0.0 if w >= 1.0 else w


def torus_distance(a, b) -> float:
    """Min-image Euclidean distance between two torus points.

    Accepts TorusPoint or any (x, y) pair; coordinates are wrapped first.
    """
    if isinstance(a, TorusPoint):
        ax, ay = a.x, a.y
    else:
        ax, ay = _wrap01(a[0]), _wrap01(a[1])
    if isinstance(b, TorusPoint):
        bx, by = b.x, b.y
    else:
        bx, by = _wrap01(b[0]), _wrap01(b[1])
    dx = abs(ax - bx)
    dy = abs(ay - by)
    dx = min(dx, 1.0 - dx)
    dy = min(dy, 1.0 - dy)
    return math.hypot(dx, dy)


def wrapped_abs_delta(diff: np.ndarray) -> np.ndarray:
    """Vectorized min-image |delta| for coordinate differences in (-1, 1)."""
    a = np.abs(diff)
    return np.minimum(a, 1.0 - a)


@dataclass(frozen=True)
class CellGrid:
    """Square grid of m x m half-open cells tiling the torus."""

    target_side: float
    mode: GridMode
    cells_per_axis: int

    @property
    def side(self) -> float:
        return 1.0 / self.cells_per_axis

    @property
    def n_cells(self) -> int:
        return self.cells_per_axis * self.cells_per_axis

    def cell_ids(self, points: np.ndarray) -> np.ndarray:
        """Flat cell id (i * m + j) for each row of an (n, 2) point array."""
        m = self.cells_per_axis
        ij = np.minimum((points * m).astype(np.int64), m - 1)
        return (ij[:, 0] * m + ij[:, 1]).astype(np.int32)


def build_grid(target_side: float, mode: GridMode) -> CellGrid:
    """Grid with the largest (AT_MOST) or smallest (AT_LEAST) cell count
    whose side respects the target; at least one cell per axis."""
    if target_side <= 0:
        raise ValueError(f"target_side must be positive, got {target_side}")
    inv = 1.0 / target_side
    if mode is GridMode.AT_MOST:
        m = math.ceil(inv - _EPS)
    else:
        m = math.floor(inv + _EPS)
    return CellGrid(target_side, mode, max(m, 1))


def build_grid_even(
    target_side: float, mode: GridMode = GridMode.AT_LEAST
) -> CellGrid:
    """Grid like build_grid but with an even cell count per axis.

    Even m keeps parity classes separated across the torus seam: with odd m,
    column m-1 and column 0 share a boundary and the same parity, which breaks
    every-other-row/column constructions (spaced independent sets, palettes).
    """
    if target_side <= 0:
        raise ValueError(f"target_side must be positive, got {target_side}")
    half = 1.0 / (2.0 * target_side)
    if mode is GridMode.AT_LEAST:
        m = 2 * math.floor(half + _EPS)
        if m < 2:
            raise ValueError(f"no even grid with side >= {target_side}")
    else:
        m = 2 * math.ceil(half - _EPS)
    return CellGrid(target_side, mode, m)


def cell_of(point, grid: CellGrid) -> tuple[int, int]:
    """Cell indices (i, j) of a point; boundaries belong to the higher cell."""
    if isinstance(point, TorusPoint):
        x, y = point.x, point.y
    else:
        x, y = _wrap01(point[0]), _wrap01(point[1])
    m = grid.cells_per_axis
    i = min(int(x * m), m - 1)
    j = min(int(y * m), m - 1)
    return i, j


def snake_order(grid: CellGrid) -> list[tuple[int, int]]:
    """All cells in boustrophedon order: row j=0 with i ascending, row j=1
    with i descending, and so on; consecutive cells always share a side."""
    m = grid.cells_per_axis
    out = []
    for j in range(m):
        cols = range(m) if j % 2 == 0 else range(m - 1, -1, -1)
        out.extend((i, j) for i in cols)
    return out


def group_by_cell(points: np.ndarray, grid: CellGrid):
    """Bucket points by cell.

    Returns (cell_ids, order, starts): `order` sorts point indices by cell id
    and `starts` has length n_cells + 1, so points of flat cell c are
    order[starts[c]:starts[c + 1]].
    """
    cell_ids = grid.cell_ids(points)
    order = np.argsort(cell_ids, kind="stable").astype(np.int32)
    starts = np.searchsorted(cell_ids[order], np.arange(grid.n_cells + 1))
    return cell_ids, order, starts
