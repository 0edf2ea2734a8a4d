"""Exception types shared across the package."""


class GridLinkError(Exception):
    """Base class for all gridlink errors."""


class InvalidGeometryError(GridLinkError):
    """A geometry violates its type invariants (self-intersection, unclosed
    ring, non-finite coordinate, empty where content is required)."""


# Geometry validation failures surface under this name on the parsing side.
ValidationError = InvalidGeometryError


class UnsupportedPairError(GridLinkError):
    """A predicate was asked about a pair it is not defined for
    (the target side of relate/within must be areal)."""


class NonPositiveThetaError(GridLinkError):
    """A buffer radius / proximity threshold must be strictly positive."""


class EmptyTargetSetError(GridLinkError):
    """A grid cannot be built over zero target entities."""


class ThetaMismatchError(GridLinkError):
    """Proximity masks were built for a different threshold than the query."""


class DomainError(GridLinkError, ValueError):
    """A numeric argument is outside its documented domain."""


class MaskFilterContradictionError(GridLinkError):
    """Debug re-verification found a mask short-circuit that contradicts
    full refinement.  Raised only when an engine runs with debug checks on."""


class ParseError(GridLinkError):
    """Malformed WKT or row input.  Carries the character position."""

    def __init__(self, reason: str, position: int = 0):
        super().__init__(f"{reason} (at position {position})")
        self.reason = reason
        self.position = position
