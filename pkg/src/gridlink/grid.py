"""Equi-grid tiling of the target dataset.

The grid covers the bounding extent of all target geometries with square
cells of a fixed size.  Only cells intersected by at least one target are
stored (sparse tiling).  Cell boxes are closed: a geometry touching a cell
edge belongs to both adjacent cells, which keeps the filter lossless;
duplicates are de-duplicated downstream.

Cell lookup for a query geometry is pure index arithmetic on its bounding
box, i.e. constant time per covered cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple

import shapely

from . import geom
from .errors import EmptyTargetSetError, InvalidGeometryError
from .geom import CONTACT_EPS, Geometry

__all__ = ["Cell", "GridConfig", "GridIndex", "build_grid", "locate_cells", "candidates"]

DEFAULT_CELL_SIZE = 2.5

Box = tuple[float, float, float, float]


class Cell(NamedTuple):
    """One grid cell: integer column/row plus its closed box."""

    ix: int
    iy: int
    box: Box


@dataclass(frozen=True)
class GridConfig:
    """Grid geometry: snapped origin, cell size and covered extent."""

    origin: tuple[float, float]
    cell_size: float
    extent: Box

    def cell(self, ix: int, iy: int) -> Cell:
        ox, oy = self.origin
        cs = self.cell_size
        return Cell(ix, iy, (ox + ix * cs, oy + iy * cs, ox + (ix + 1) * cs, oy + (iy + 1) * cs))

    def index_range(self, b: Box, margin: float = 0.0) -> tuple[int, int, int, int]:
        """Inclusive (ix_lo, ix_hi, iy_lo, iy_hi) of cells whose closed boxes
        intersect box ``b`` expanded by ``margin``."""
        ox, oy = self.origin
        cs = self.cell_size
        pad = margin + CONTACT_EPS
        ix_lo = math.floor((b[0] - pad - ox) / cs)
        iy_lo = math.floor((b[1] - pad - oy) / cs)
        ix_hi = math.floor((b[2] + pad - ox) / cs)
        iy_hi = math.floor((b[3] + pad - oy) / cs)
        return ix_lo, ix_hi, iy_lo, iy_hi


class GridIndex:
    """Sparse cell -> target-id index over a frozen target store.

    Built single-threaded, then immutable; reads are thread-safe.
    """

    def __init__(
        self,
        config: GridConfig,
        cells: dict[tuple[int, int], tuple[str, ...]],
        targets: dict[str, Geometry],
    ):
        self.config = config
        self.targets = targets
        b = config.index_range(config.extent)
        self._ix_lo, self._ix_hi, self._iy_lo, self._iy_hi = b
        self.cells: dict[Cell, tuple[str, ...]] = {
            config.cell(ix, iy): ids for (ix, iy), ids in sorted(cells.items())
        }
        self._by_index = {(c.ix, c.iy): c for c in self.cells}
        # Prepared handles make the refinement predicates cheap.
        for g in targets.values():
            shapely.prepare(geom.as_shape(g))

    def __len__(self) -> int:
        return len(self.cells)

    def targets_of(self, cell: Cell) -> tuple[str, ...]:
        return self.cells.get(cell, ())

    def locate_cells(self, a, margin: float = 0.0) -> set[Cell]:
        """Populated cells whose boxes intersect the bounding box of ``a``
        (expanded by ``margin``).  Sparse misses yield the empty set."""
        ix_lo, ix_hi, iy_lo, iy_hi = self.config.index_range(geom.bounds(a), margin)
        ix_lo = max(ix_lo, self._ix_lo)
        iy_lo = max(iy_lo, self._iy_lo)
        ix_hi = min(ix_hi, self._ix_hi)
        iy_hi = min(iy_hi, self._iy_hi)
        if ix_lo > ix_hi or iy_lo > iy_hi:
            return set()
        span = (ix_hi - ix_lo + 1) * (iy_hi - iy_lo + 1)
        if span > len(self._by_index):
            return {
                c
                for (ix, iy), c in self._by_index.items()
                if ix_lo <= ix <= ix_hi and iy_lo <= iy <= iy_hi
            }
        found = set()
        for ix in range(ix_lo, ix_hi + 1):
            for iy in range(iy_lo, iy_hi + 1):
                c = self._by_index.get((ix, iy))
                if c is not None:
                    found.add(c)
        return found

    def candidates(self, a, margin: float = 0.0) -> set[str]:
        """Target ids sharing at least one cell with ``a`` (de-duplicated)."""
        ids: set[str] = set()
        for cell in self.locate_cells(a, margin):
            ids.update(self.cells[cell])
        return ids


def build_grid(targets: Mapping[str, Geometry], cell_size: float = DEFAULT_CELL_SIZE) -> GridIndex:
    """Tile the extent of ``targets`` and assign each target to every cell
    whose closed box it intersects (bounding-box prefilter, then exact
    geometry-box confirmation)."""
    if not targets:
        raise EmptyTargetSetError("cannot build a grid over zero targets")
    if not cell_size > 0:
        raise InvalidGeometryError(f"cell_size must be > 0, got {cell_size}")

    store: dict[str, Geometry] = {}
    for tid in sorted(targets):
        g = targets[tid]
        if not geom.is_areal(g):
            raise InvalidGeometryError(f"target {tid!r} is not areal")
        if isinstance(g, geom.MultiPolygon) and g.is_empty():
            raise InvalidGeometryError(f"target {tid!r} has empty geometry")
        store[tid] = g

    minx, miny, maxx, maxy = geom.bounds(next(iter(store.values())))
    for g in store.values():
        b = geom.bounds(g)
        minx, miny = min(minx, b[0]), min(miny, b[1])
        maxx, maxy = max(maxx, b[2]), max(maxy, b[3])
    origin = (
        math.floor(minx / cell_size) * cell_size,
        math.floor(miny / cell_size) * cell_size,
    )
    config = GridConfig(origin=origin, cell_size=cell_size, extent=(minx, miny, maxx, maxy))

    assignment: dict[tuple[int, int], list[str]] = {}
    for tid, g in store.items():
        shape = geom.as_shape(g)
        ix_lo, ix_hi, iy_lo, iy_hi = config.index_range(geom.bounds(g))
        for ix in range(ix_lo, ix_hi + 1):
            for iy in range(iy_lo, iy_hi + 1):
                cell = config.cell(ix, iy)
                if shapely.intersects(shapely.box(*cell.box), shape):
                    assignment.setdefault((ix, iy), []).append(tid)

    cells = {key: tuple(sorted(ids)) for key, ids in assignment.items()}
    return GridIndex(config, cells, store)


def locate_cells(a, grid: GridIndex, margin: float = 0.0) -> set[Cell]:
    return grid.locate_cells(a, margin)


def candidates(a, grid: GridIndex, margin: float = 0.0) -> set[str]:
    return grid.candidates(a, margin)
