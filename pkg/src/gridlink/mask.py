"""Per-cell empty-space geometries.

For each populated grid cell the "mask" is the part of the cell not covered
by any target assigned to it.  A source geometry that lies entirely in a
cell's mask cannot relate to any of that cell's targets except by being
disjoint from them, so one comparison against the mask can replace the k
comparisons against the targets.

For proximity queries the same construction is applied to theta-buffered
targets: a source inside the buffered mask is farther than theta from every
target assigned to the cell.

The filter test is implemented as strict disjointness from the covered
region (the mask's complement within the cell).  That is equivalent to
enclosure in the mask, but stays sound when a source merely touches a
target boundary: touching sources fall through to refinement.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from threading import Lock
from typing import Iterable, Iterator

import shapely

from . import geom
from .errors import NonPositiveThetaError
from .geom import DEFAULT_QUAD_SEGS, Geometry, MultiPolygon
from .grid import Cell, GridIndex

__all__ = ["MaskKind", "CellMask", "MaskStore", "compute_mask", "compute_buffered_mask", "build_masks"]


class MaskKind(enum.Enum):
    PLAIN = "plain"
    BUFFERED = "buffered"


class CellMask:
    """Empty space of one cell, plus the covered complement it was cut from.

    Immutable after construction; safe to share between workers.
    """

    __slots__ = ("cell", "geometry", "kind", "theta", "_cover")

    def __init__(
        self,
        cell: Cell,
        geometry: MultiPolygon,
        kind: MaskKind,
        theta: float | None = None,
        cover=None,
    ):
        self.cell = cell
        self.geometry = geometry
        self.kind = kind
        self.theta = theta
        if cover is None:
            cover = shapely.difference(shapely.box(*cell.box), geom.as_shape(geometry))
        shapely.prepare(cover)
        self._cover = cover

    def __repr__(self) -> str:
        return f"CellMask(cell=({self.cell.ix},{self.cell.iy}), kind={self.kind.value}, area={geom.area(self.geometry):.6g})"

    def is_empty(self) -> bool:
        return self.geometry.is_empty()

    def isolates(self, a) -> bool:
        """True when ``a`` provably lies in this cell's empty space, i.e. it
        does not touch the covered region.  A fully covered cell (empty
        mask) never isolates anything."""
        if self.geometry.is_empty():
            return False
        return not shapely.intersects(self._cover, geom.as_shape(a))


def _build(cell: Cell, shapes: list, kind: MaskKind, theta: float | None) -> CellMask:
    box = shapely.box(*cell.box)
    if shapes:
        cover = shapely.intersection(box, shapely.union_all(shapes))
        raw = shapely.difference(box, cover)
    else:
        cover = shapely.Polygon()
        raw = box
    return CellMask(cell=cell, geometry=geom._overlay(raw), kind=kind, theta=theta, cover=cover)


def compute_mask(cell: Cell, targets: Iterable[Geometry]) -> CellMask:
    """Mask of ``cell`` against the plain target geometries assigned to it:
    the cell box minus the union of the targets."""
    return _build(cell, [geom.as_shape(t) for t in targets], MaskKind.PLAIN, None)


def compute_buffered_mask(
    cell: Cell,
    targets: Iterable[Geometry],
    theta: float,
    quad_segs: int = DEFAULT_QUAD_SEGS,
) -> CellMask:
    """Mask of ``cell`` against theta-buffered targets."""
    if not theta > 0:
        raise NonPositiveThetaError(f"theta must be > 0, got {theta}")
    shapes = [geom.as_shape(t).buffer(theta, quad_segs=quad_segs) for t in targets]
    return _build(cell, shapes, MaskKind.BUFFERED, theta)


class MaskStore:
    """One mask per populated cell of a grid.

    Eager stores are fully materialized at build time (optionally across
    worker threads; cells are independent).  Lazy stores compute each mask
    on first touch under a lock; once a cell is materialized, reads are
    lock-free.
    """

    def __init__(
        self,
        grid: GridIndex,
        kind: MaskKind = MaskKind.PLAIN,
        theta: float | None = None,
        quad_segs: int = DEFAULT_QUAD_SEGS,
        eager: bool = True,
        workers: int = 1,
    ):
        if kind is MaskKind.BUFFERED and not (theta and theta > 0):
            raise NonPositiveThetaError("buffered masks need theta > 0")
        if kind is MaskKind.PLAIN:
            theta = None
        self.grid = grid
        self.kind = kind
        self.theta = theta
        self.quad_segs = quad_segs
        self._masks: dict[Cell, CellMask] = {}
        self._lock = Lock()
        if eager:
            cells = list(grid.cells)
            if workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    for cell, m in zip(cells, pool.map(self._compute, cells)):
                        self._masks[cell] = m
            else:
                for cell in cells:
                    self._masks[cell] = self._compute(cell)

    def _compute(self, cell: Cell) -> CellMask:
        targets = [self.grid.targets[tid] for tid in self.grid.targets_of(cell)]
        if self.kind is MaskKind.PLAIN:
            return compute_mask(cell, targets)
        return compute_buffered_mask(cell, targets, self.theta, self.quad_segs)

    def get(self, cell: Cell) -> CellMask:
        m = self._masks.get(cell)
        if m is None:
            with self._lock:
                m = self._masks.get(cell)
                if m is None:
                    m = self._compute(cell)
                    self._masks[cell] = m
        return m

    def __len__(self) -> int:
        return len(self._masks)

    def items(self) -> Iterator[tuple[Cell, CellMask]]:
        for cell in self.grid.cells:
            yield cell, self.get(cell)


def build_masks(
    grid: GridIndex,
    kind: MaskKind = MaskKind.PLAIN,
    theta: float | None = None,
    quad_segs: int = DEFAULT_QUAD_SEGS,
    eager: bool = True,
    workers: int = 1,
) -> MaskStore:
    """Materialize masks for every populated cell of ``grid``."""
    return MaskStore(grid, kind=kind, theta=theta, quad_segs=quad_segs, eager=eager, workers=workers)
