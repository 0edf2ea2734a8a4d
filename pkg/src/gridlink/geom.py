"""Planar geometry kernel: types, predicates, distances and boolean operations.

Coordinates are 64-bit floats in abstract planar units (degrees behave the
same way; no CRS handling).  All values are immutable after construction and
safe to share between threads; every operation is a pure function.

Boolean operations are delegated to GEOS (via shapely), which implements a
robust intersection-based overlay.  Outputs are snapped to a 1e-9 grid and
polygon slivers below 1e-12 area are dropped, so repeated set operations
(e.g. accumulating cell masks) stay stable.

Predicates follow closed-set semantics with a contact tolerance of 1e-9
length units:

* ``within(a, b)``   -- a is enclosed in b, boundary contact allowed.
* ``covers``         -- the inverse direction of ``within``.
* ``meets``          -- boundary contact with no common interior.
* ``overlaps``       -- common interior, neither side enclosing the other.
* ``disjoint``       -- farther apart than the contact tolerance.

Zero-measure probes (points, polylines) that only touch the boundary of an
areal geometry report ``meets`` rather than ``within``; this keeps the
empty-space filter in :mod:`gridlink.mask` sound at tangencies.

The distance metric is Euclidean.  ``metric`` hooks can be passed to
:func:`distance` for other metrics (e.g. haversine), but only Euclidean is
used by the engines.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

import shapely
import shapely.ops
from shapely.geometry import (
    LineString as _LineString,
    MultiPolygon as _MultiPolygon,
    Point as _Point,
    Polygon as _Polygon,
)

from .errors import (
    InvalidGeometryError,
    NonPositiveThetaError,
    UnsupportedPairError,
)

__all__ = [
    "CONTACT_EPS",
    "SLIVER_AREA",
    "SNAP_GRID",
    "DEFAULT_QUAD_SEGS",
    "Relation",
    "Point",
    "PolyLine",
    "Polygon",
    "MultiPolygon",
    "Geometry",
    "area",
    "bounds",
    "buffer",
    "chord_error",
    "difference",
    "distance",
    "intersection",
    "is_areal",
    "relate",
    "union_all",
    "within",
]

# Boundary-contact tolerance (length units).  Pairs closer than this are
# treated as touching; keeps float predicates deterministic.
CONTACT_EPS = 1e-9
# Boolean-op outputs with less area than this are dropped as noise.
SLIVER_AREA = 1e-12
# Boolean-op output coordinates are snapped to this grid.
SNAP_GRID = 1e-9
# Arc segments per quarter circle used when buffering.
DEFAULT_QUAD_SEGS = 8

Coord = tuple[float, float]


class Relation(enum.Enum):
    """Spatial relations a link can assert between two entities."""

    WITHIN = "within"
    COVERS = "covers"
    OVERLAPS = "overlaps"
    MEETS = "meets"
    DISJOINT = "disjoint"
    NEARBY = "nearby"

    def __lt__(self, other: "Relation") -> bool:
        if not isinstance(other, Relation):
            return NotImplemented
        return self.value < other.value


def _check_finite(x: float, y: float) -> None:
    if not (math.isfinite(x) and math.isfinite(y)):
        raise InvalidGeometryError(f"non-finite coordinate ({x}, {y})")


def _as_coords(points: Iterable) -> tuple[Coord, ...]:
    out = []
    for p in points:
        if isinstance(p, Point):
            out.append((p.x, p.y))
        else:
            x, y = p
            out.append((float(x), float(y)))
    return tuple(out)


@dataclass(frozen=True)
class Point:
    """A single 2D location."""

    x: float
    y: float

    def __post_init__(self):
        _check_finite(self.x, self.y)
        object.__setattr__(self, "_shape", _Point(self.x, self.y))


@dataclass(frozen=True)
class PolyLine:
    """An open chain of at least two distinct vertices."""

    vertices: tuple[Coord, ...]

    def __init__(self, vertices: Iterable):
        coords = _as_coords(vertices)
        if len(coords) < 2:
            raise InvalidGeometryError("polyline needs at least 2 vertices")
        for (x, y) in coords:
            _check_finite(x, y)
        for a, b in zip(coords, coords[1:]):
            if a == b:
                raise InvalidGeometryError(f"repeated consecutive vertex {a}")
        object.__setattr__(self, "vertices", coords)
        object.__setattr__(self, "_shape", _LineString(coords))


def _ring_signed_area(ring: Sequence[Coord]) -> float:
    # Shoelace, positive for counter-clockwise.
    s = 0.0
    for (x0, y0), (x1, y1) in zip(ring, ring[1:]):
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def _validate_ring(ring: tuple[Coord, ...], label: str) -> tuple[Coord, ...]:
    if len(ring) < 4:
        raise InvalidGeometryError(f"{label} has {len(ring)} points, need >= 4")
    if ring[0] != ring[-1]:
        raise InvalidGeometryError(f"{label} is not closed")
    for (x, y) in ring:
        _check_finite(x, y)
    for a, b in zip(ring, ring[1:]):
        if a == b:
            raise InvalidGeometryError(f"{label} repeats consecutive vertex {a}")
    return ring


def _orient(ring: tuple[Coord, ...], ccw: bool) -> tuple[Coord, ...]:
    sa = _ring_signed_area(ring)
    if sa == 0.0:
        raise InvalidGeometryError("ring has zero area")
    return ring if (sa > 0) == ccw else ring[::-1]


@dataclass(frozen=True)
class Polygon:
    """A simple polygon with optional holes.

    Stored canonically: exterior counter-clockwise, holes clockwise.
    Self-intersecting or otherwise invalid rings are rejected, not repaired.
    """

    exterior: tuple[Coord, ...]
    holes: tuple[tuple[Coord, ...], ...]

    def __init__(self, exterior: Iterable, holes: Iterable = ()):
        ext = _orient(_validate_ring(_as_coords(exterior), "exterior ring"), ccw=True)
        hs = tuple(
            _orient(_validate_ring(_as_coords(h), f"hole ring {i}"), ccw=False)
            for i, h in enumerate(holes)
        )
        shape = _Polygon(ext, hs)
        if not shape.is_valid:
            raise InvalidGeometryError(
                f"invalid polygon: {shapely.is_valid_reason(shape)}"
            )
        object.__setattr__(self, "exterior", ext)
        object.__setattr__(self, "holes", hs)
        object.__setattr__(self, "_shape", shape)


@dataclass(frozen=True)
class MultiPolygon:
    """Zero or more polygons with pairwise disjoint interiors."""

    parts: tuple[Polygon, ...]

    def __init__(self, parts: Iterable[Polygon] = ()):
        ps = tuple(parts)
        for p in ps:
            if not isinstance(p, Polygon):
                raise InvalidGeometryError("multipolygon parts must be Polygon")
        shape = _MultiPolygon([p._shape for p in ps]) if ps else _MultiPolygon([])
        if ps and not shape.is_valid:
            raise InvalidGeometryError(
                f"invalid multipolygon: {shapely.is_valid_reason(shape)}"
            )
        object.__setattr__(self, "parts", ps)
        object.__setattr__(self, "_shape", shape)

    def is_empty(self) -> bool:
        return not self.parts


Geometry = Union[Point, PolyLine, Polygon, MultiPolygon]


def as_shape(g) -> shapely.Geometry:
    """The shapely handle backing a geometry (accepts raw shapely too)."""
    if isinstance(g, (Point, PolyLine, Polygon, MultiPolygon)):
        return g._shape
    if isinstance(g, shapely.Geometry):
        return g
    raise InvalidGeometryError(f"not a geometry: {type(g).__name__}")


def is_areal(g) -> bool:
    return isinstance(g, (Polygon, MultiPolygon))


def _ensure_areal(g, role: str):
    if not is_areal(g):
        raise UnsupportedPairError(f"{role} must be areal, got {type(g).__name__}")


def bounds(g) -> tuple[float, float, float, float]:
    """Axis-aligned bounding box (minx, miny, maxx, maxy)."""
    return tuple(shapely.bounds(as_shape(g)))


def _clean_ring(coords) -> list[Coord] | None:
    ring = [(float(x), float(y)) for x, y in coords]
    out = [ring[0]]
    for c in ring[1:]:
        if c != out[-1]:
            out.append(c)
    if out[0] != out[-1]:
        out.append(out[0])
    return out if len(out) >= 4 else None


def _from_shapely_areal(shape) -> MultiPolygon:
    """Wrap a polygonal GEOS result, dropping slivers and lower-dimension bits."""
    parts = []
    for poly in _iter_polygons(shape):
        if poly.area <= SLIVER_AREA:
            continue
        ext = _clean_ring(poly.exterior.coords)
        if ext is None:
            continue
        holes = []
        for hole in poly.interiors:
            h = _clean_ring(hole.coords)
            if h is not None and abs(_ring_signed_area(h)) > SLIVER_AREA:
                holes.append(h)
        parts.append(Polygon(ext, holes))
    return MultiPolygon(parts)


def _iter_polygons(shape):
    if shape.is_empty:
        return
    t = shape.geom_type
    if t == "Polygon":
        yield shape
    elif t in ("MultiPolygon", "GeometryCollection"):
        for part in shape.geoms:
            yield from _iter_polygons(part)
    # points/lines in mixed collections carry no area: dropped


def _overlay(shape) -> MultiPolygon:
    snapped = shapely.set_precision(shape, SNAP_GRID)
    return _from_shapely_areal(snapped)


def area(g) -> float:
    """Shoelace area with holes subtracted; defined for areal geometries."""
    if not is_areal(g):
        raise InvalidGeometryError("area() requires an areal geometry")
    return float(as_shape(g).area)


def distance(a, b, metric: Callable[[Coord, Coord], float] | None = None) -> float:
    """Minimum distance between any point of a and any point of b.

    Zero when the geometries intersect.  Symmetric.  ``metric`` is a hook
    for alternative point metrics; the default (and only engine-tested)
    metric is Euclidean.
    """
    sa, sb = as_shape(a), as_shape(b)
    if metric is not None:
        return _distance_with_metric(sa, sb, metric)
    return float(shapely.distance(sa, sb))


def _distance_with_metric(sa, sb, metric) -> float:
    # Hook path: exact only for point pairs; other inputs fall back to the
    # metric applied to the Euclidean nearest points.
    pa, pb = shapely.ops.nearest_points(sa, sb)
    if sa.intersects(sb):
        return 0.0
    return float(metric((pa.x, pa.y), (pb.x, pb.y)))


def intersection(a, b) -> MultiPolygon:
    """Region common to two areal geometries (empty when disjoint)."""
    _ensure_areal(a, "intersection() operand")
    _ensure_areal(b, "intersection() operand")
    return _overlay(shapely.intersection(as_shape(a), as_shape(b)))


def union_all(gs: Iterable) -> MultiPolygon:
    """Region covered by at least one of the areal inputs."""
    shapes = []
    for g in gs:
        _ensure_areal(g, "union_all() operand")
        shapes.append(as_shape(g))
    if not shapes:
        return MultiPolygon(())
    return _overlay(shapely.union_all(shapes))


def difference(a, b) -> MultiPolygon:
    """Points of a outside the interior of b."""
    _ensure_areal(a, "difference() operand")
    _ensure_areal(b, "difference() operand")
    return _overlay(shapely.difference(as_shape(a), as_shape(b)))


def buffer(g, theta: float, quad_segs: int = DEFAULT_QUAD_SEGS):
    """Expand a geometry by radius ``theta``.

    Circular arcs are approximated by ``quad_segs`` chords per quarter
    circle with vertices on the true circle, so the result is inscribed:
    it never extends past the exact buffer, and the boundary sags below it
    by at most :func:`chord_error`.  Straight offset edges are exact.
    """
    if not theta > 0:
        raise NonPositiveThetaError(f"theta must be > 0, got {theta}")
    if quad_segs < 1:
        raise NonPositiveThetaError("quad_segs must be >= 1")
    out = as_shape(g).buffer(theta, quad_segs=quad_segs)
    result = _from_shapely_areal(out)
    if len(result.parts) == 1:
        return result.parts[0]
    return result


def chord_error(theta: float, quad_segs: int = DEFAULT_QUAD_SEGS) -> float:
    """Documented upper bound on the buffer arc approximation error."""
    return theta * (1.0 - math.cos(math.pi / (2.0 * quad_segs)))


def within(a, b) -> bool:
    """True iff a is enclosed in b (closed sets: boundary contact allowed)."""
    _ensure_areal(b, "within() target")
    sa, sb = as_shape(a), as_shape(b)
    if sb.covers(sa):
        return True
    if is_areal(a):
        # Tolerate boolean-op noise on near-total enclosure.
        return shapely.difference(sa, sb).area <= SLIVER_AREA
    return False


def relate(a, b) -> frozenset[Relation]:
    """All relations holding between a and an areal b.

    Exactly ``{DISJOINT}`` when there is no contact within the tolerance;
    otherwise a non-empty subset of {WITHIN, COVERS, OVERLAPS, MEETS}.
    """
    _ensure_areal(b, "relate() target")
    sa, sb = as_shape(a), as_shape(b)
    if not shapely.dwithin(sa, sb, CONTACT_EPS):
        return frozenset({Relation.DISJOINT})
    if isinstance(a, Point):
        if shapely.dwithin(sa, sb.boundary, CONTACT_EPS):
            return frozenset({Relation.MEETS})
        if sb.covers(sa):
            return frozenset({Relation.WITHIN})
        return frozenset({Relation.MEETS})
    if isinstance(a, PolyLine):
        in_b = shapely.intersection(sa, sb).length
        on_boundary = shapely.intersection(sa, sb.boundary).length
        passes_interior = (in_b - on_boundary) > CONTACT_EPS
        if not passes_interior:
            return frozenset({Relation.MEETS})
        if sb.covers(sa):
            return frozenset({Relation.WITHIN})
        return frozenset({Relation.OVERLAPS})
    # areal source
    inter_area = shapely.intersection(sa, sb).area
    if inter_area <= SLIVER_AREA:
        return frozenset({Relation.MEETS})
    rels = set()
    if within(a, b):
        rels.add(Relation.WITHIN)
    if within(b, a):
        rels.add(Relation.COVERS)
    if not rels:
        rels.add(Relation.OVERLAPS)
    return frozenset(rels)
