"""Bind geographic intersection coordinates to network junctions and group
each junction's edges by the cardinal direction of travel.

Incoming edges are classified by the bearing from their upstream junction
toward the intersection, so the label is the direction vehicles are heading:
an incoming edge classified ``north`` carries northbound traffic. Outgoing
edges are classified by the bearing away from the intersection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    EmptyNetworkError,
    GeometryError,
    ToleranceExceeded,
    UnknownJunctionError,
)
from .netmodel import RoadNetwork, bearing_degrees, lonlat_to_xy

DEFAULT_TOLERANCE_M = 5.0


class Cardinal(Enum):
    EAST = "east"
    NORTH = "north"
    WEST = "west"
    SOUTH = "south"

    @property
    def letter(self) -> str:
        return {"east": "E", "north": "N", "west": "W", "south": "S"}[self.value]

    @classmethod
    def from_letter(cls, letter: str) -> "Cardinal":
        for c in cls:
            if c.letter == letter:
                return c
        raise ValueError(f"no cardinal for letter {letter!r}")


_AXIS_ANGLE = {
    Cardinal.EAST: 0.0,
    Cardinal.NORTH: 90.0,
    Cardinal.WEST: 180.0,
    Cardinal.SOUTH: 270.0,
}


def classify_direction(angle: float) -> Cardinal:
    """Cardinal sector of an angle in [0, 360).

    east [315, 360) and [0, 45); north [45, 135); west [135, 225);
    south [225, 315).
    """
    if not 0.0 <= angle < 360.0:
        raise ValueError(f"angle {angle} outside [0, 360)")
    if angle >= 315.0 or angle < 45.0:
        return Cardinal.EAST
    if angle < 135.0:
        return Cardinal.NORTH
    if angle < 225.0:
        return Cardinal.WEST
    return Cardinal.SOUTH


def axis_deviation(angle: float, cardinal: Cardinal) -> float:
    """Absolute angular distance from a cardinal's axis, in [0, 180]."""
    diff = abs(angle - _AXIS_ANGLE[cardinal]) % 360.0
    return min(diff, 360.0 - diff)


@dataclass(frozen=True)
class EdgeFilterPolicy:
    """Which edges qualify for demand attachment.

    The default keeps edges whose type string marks a road usable by cars
    ("highway" present, "footway" absent). ``include_untyped`` admits edges
    with empty type strings so hand-built networks without map tags can still
    be mapped.
    """

    include_untyped: bool = False

    def admit(self, type_string: str) -> tuple[bool, str]:
        if not type_string:
            if self.include_untyped:
                return True, ""
            return False, "untyped edge"
        if "footway" in type_string:
            return False, "footway"
        if "highway" not in type_string:
            return False, f"non-highway type {type_string!r}"
        return True, ""


DEFAULT_FILTER = EdgeFilterPolicy()


@dataclass
class EdgeMapping:
    """Edges of one junction grouped by cardinal travel direction.

    Lists are ordered by angular deviation from the cardinal axis, ties broken
    by edge id, so the head of each list is the natural representative for
    demand attachment.
    """

    incoming: dict[Cardinal, list[str]] = field(
        default_factory=lambda: {c: [] for c in Cardinal}
    )
    outgoing: dict[Cardinal, list[str]] = field(
        default_factory=lambda: {c: [] for c in Cardinal}
    )
    skipped_edges: list[tuple[str, str]] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    def representative(self, side: str, cardinal: Cardinal) -> str | None:
        edges = (self.incoming if side == "incoming" else self.outgoing)[cardinal]
        return edges[0] if edges else None


@dataclass(frozen=True)
class IntersectionBinding:
    """Result of binding one external intersection to the network."""

    source_id: str
    junction_id: str
    match_distance: float
    mapping: EdgeMapping

    def __post_init__(self):
        if self.match_distance < 0:
            raise ValueError("match_distance must be non-negative")


def find_nearest_junction(
    net: RoadNetwork, lon: float, lat: float, tol: float = DEFAULT_TOLERANCE_M
) -> tuple[str, float]:
    """Nearest non-internal junction to a geographic point.

    Returns ``(junction_id, distance)``. If the best candidate is farther than
    ``tol`` raises ToleranceExceeded carrying that candidate, so callers can
    confirm and proceed anyway.
    """
    x, y = lonlat_to_xy(net.projection, lon, lat)
    best_id = None
    best_d2 = float("inf")
    for junction in net.normal_junctions():
        dx = junction.x - x
        dy = junction.y - y
        d2 = dx * dx + dy * dy
        if d2 < best_d2 or (d2 == best_d2 and (best_id is None or junction.id < best_id)):
            best_d2 = d2
            best_id = junction.id
    if best_id is None:
        raise EmptyNetworkError("network has no junctions to match against")
    distance = best_d2 ** 0.5
    if distance > tol:
        raise ToleranceExceeded(best_id, distance, tol)
    return best_id, distance


def map_intersection_edges(
    net: RoadNetwork, junction_id: str, policy: EdgeFilterPolicy = DEFAULT_FILTER
) -> EdgeMapping:
    """Classify a junction's incoming and outgoing edges by travel direction."""
    junction = net.junctions.get(junction_id)
    if junction is None:
        raise UnknownJunctionError(f"unknown junction {junction_id!r}")
    if junction.internal:
        raise UnknownJunctionError(f"junction {junction_id!r} is internal")

    mapping = EdgeMapping()
    deviations: dict[str, float] = {}

    def place(edge_id: str, side: str) -> None:
        edge = net.edges[edge_id]
        ok, reason = policy.admit(edge.type_string)
        if not ok:
            mapping.skipped_edges.append((edge_id, reason))
            return
        if side == "incoming":
            start = net.junctions[edge.from_junction].coord
            end = junction.coord
        else:
            start = junction.coord
            end = net.junctions[edge.to_junction].coord
        try:
            angle = bearing_degrees(start, end)
        except GeometryError:
            mapping.skipped_edges.append((edge_id, "degenerate geometry"))
            return
        cardinal = classify_direction(angle)
        getattr(mapping, side)[cardinal].append(edge_id)
        deviations[edge_id] = axis_deviation(angle, cardinal)

    for edge_id in junction.incoming_edges:
        place(edge_id, "incoming")
    for edge_id in junction.outgoing_edges:
        place(edge_id, "outgoing")

    for group in (mapping.incoming, mapping.outgoing):
        for cardinal, edges in group.items():
            edges.sort(key=lambda eid: (deviations[eid], eid))

    for side_name, group in (("incoming", mapping.incoming), ("outgoing", mapping.outgoing)):
        for cardinal, edges in group.items():
            if len(edges) > 1:
                mapping.diagnostics.append(
                    f"junction {junction_id!r}: {len(edges)} {side_name} edges share "
                    f"cardinal {cardinal.value}; using {edges[0]!r} as representative"
                )
    return mapping


def bind_intersection(
    net: RoadNetwork,
    source_id: str,
    lon: float,
    lat: float,
    tol: float = DEFAULT_TOLERANCE_M,
    policy: EdgeFilterPolicy = DEFAULT_FILTER,
) -> IntersectionBinding:
    """Find the junction for an intersection coordinate and map its edges.

    ToleranceExceeded from the nearest-junction search propagates unchanged.
    """
    junction_id, distance = find_nearest_junction(net, lon, lat, tol)
    mapping = map_intersection_edges(net, junction_id, policy)
    return IntersectionBinding(
        source_id=str(source_id),
        junction_id=junction_id,
        match_distance=distance,
        mapping=mapping,
    )
