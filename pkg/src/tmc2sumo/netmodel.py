"""Parsed road-network model and planar geometry helpers.

Reads the simulator's network XML (``location``, ``junction``, ``edge``
elements), keeps just enough structure for intersection mapping: junction
coordinates, edge endpoints and type strings, and the geographic projection
needed to convert lon/lat into the network frame. Everything is immutable
after parsing.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from . import utm
from .errors import GeometryError, NetworkParseError, ProjectionError

IDENTITY = "identity"
UTM = "utm"


@dataclass(frozen=True)
class GeoProjection:
    """Projection metadata from the network's location element."""

    kind: str = IDENTITY
    utm_zone: int = 0
    northern_hemisphere: bool = True
    net_offset: tuple[float, float] = (0.0, 0.0)
    conv_boundary: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    orig_boundary: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind not in (IDENTITY, UTM):
            raise ProjectionError(f"unsupported projection kind {self.kind!r}")
        if self.kind == UTM and not 1 <= self.utm_zone <= 60:
            raise ProjectionError(f"UTM zone {self.utm_zone} outside [1, 60]")
        for v in (*self.net_offset, *self.conv_boundary, *self.orig_boundary):
            if not math.isfinite(v):
                raise ProjectionError("non-finite value in projection metadata")
        xmin, ymin, xmax, ymax = self.conv_boundary
        if xmin > xmax or ymin > ymax:
            raise ProjectionError("convBoundary minimum exceeds maximum")


@dataclass(frozen=True)
class Junction:
    id: str
    x: float
    y: float
    incoming_edges: tuple[str, ...] = ()
    outgoing_edges: tuple[str, ...] = ()
    junction_type: str = "priority"

    @property
    def internal(self) -> bool:
        return self.junction_type == "internal"

    @property
    def coord(self) -> tuple[float, float]:
        return (self.x, self.y)


NORMAL = "normal"
INTERNAL = "internal"


@dataclass(frozen=True)
class Edge:
    id: str
    from_junction: str
    to_junction: str
    type_string: str = ""
    lane_count: int = 1
    function: str = NORMAL


@dataclass(frozen=True)
class RoadNetwork:
    projection: GeoProjection
    junctions: dict[str, Junction] = field(default_factory=dict)
    edges: dict[str, Edge] = field(default_factory=dict)

    def normal_junctions(self):
        return (j for j in self.junctions.values() if not j.internal)

    def normal_edges(self):
        return (e for e in self.edges.values() if e.function == NORMAL)


def _parse_floats(raw: str, n: int, what: str) -> tuple[float, ...]:
    parts = raw.split(",")
    if len(parts) != n:
        raise NetworkParseError(f"{what} must have {n} comma-separated values, got {raw!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise NetworkParseError(f"bad number in {what}: {raw!r}") from exc


def _parse_projection(location: ET.Element) -> GeoProjection:
    proj_str = (location.get("projParameter") or "!").strip()
    net_offset = _parse_floats(location.get("netOffset", "0,0"), 2, "netOffset")
    conv = _parse_floats(location.get("convBoundary", "0,0,0,0"), 4, "convBoundary")
    orig = _parse_floats(location.get("origBoundary", "0,0,0,0"), 4, "origBoundary")

    if proj_str in ("!", ""):
        return GeoProjection(IDENTITY, 0, True, net_offset, conv, orig)
    if "+proj=utm" in proj_str:
        zone = None
        for token in proj_str.split():
            if token.startswith("+zone="):
                try:
                    zone = int(token.split("=", 1)[1])
                except ValueError:
                    raise ProjectionError(f"bad UTM zone in projection {proj_str!r}")
        if zone is None:
            raise ProjectionError(f"UTM projection without zone: {proj_str!r}")
        northern = "+south" not in proj_str
        return GeoProjection(UTM, zone, northern, net_offset, conv, orig)
    raise ProjectionError(f"unsupported projection string {proj_str!r}")


def parse_network(xml_text: str) -> RoadNetwork:
    """Parse network XML into a RoadNetwork.

    Internal junctions and edges are retained but flagged, so mapping queries
    can skip them. Raises NetworkParseError naming the offending element for
    referential-integrity violations.
    """
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise NetworkParseError(f"malformed network XML: {exc}") from exc

    location = root.find("location")
    if location is None:
        raise NetworkParseError("missing location element")
    projection = _parse_projection(location)

    junctions: dict[str, Junction] = {}
    raw_junctions = []
    for el in root.iter("junction"):
        jid = el.get("id")
        if jid is None:
            raise NetworkParseError("junction without id")
        try:
            x = float(el.get("x", ""))
            y = float(el.get("y", ""))
        except ValueError:
            raise NetworkParseError(f"junction {jid!r} has non-numeric coordinates")
        if not (math.isfinite(x) and math.isfinite(y)):
            raise NetworkParseError(f"junction {jid!r} has non-finite coordinates")
        raw_junctions.append((jid, x, y, el.get("type", "priority")))
    if not raw_junctions:
        raise NetworkParseError("missing junctions")

    edges: dict[str, Edge] = {}
    junction_ids = {jid for jid, *_ in raw_junctions}
    for el in root.iter("edge"):
        eid = el.get("id")
        if eid is None:
            raise NetworkParseError("edge without id")
        function = el.get("function", NORMAL)
        from_j = el.get("from", "")
        to_j = el.get("to", "")
        lane_count = len(el.findall("lane")) or int(el.get("numLanes", "1"))
        if function == NORMAL:
            for endpoint, side in ((from_j, "from"), (to_j, "to")):
                if endpoint not in junction_ids:
                    raise NetworkParseError(
                        f"edge {eid!r} references unknown {side} junction {endpoint!r}"
                    )
            if from_j == to_j:
                raise NetworkParseError(f"edge {eid!r} is a self-loop")
        edges[eid] = Edge(
            id=eid,
            from_junction=from_j,
            to_junction=to_j,
            type_string=el.get("type", ""),
            lane_count=max(1, lane_count),
            function=INTERNAL if function != NORMAL else NORMAL,
        )

    incoming: dict[str, list[str]] = {jid: [] for jid in junction_ids}
    outgoing: dict[str, list[str]] = {jid: [] for jid in junction_ids}
    for edge in edges.values():
        if edge.function != NORMAL:
            continue
        outgoing[edge.from_junction].append(edge.id)
        incoming[edge.to_junction].append(edge.id)

    for jid, x, y, jtype in raw_junctions:
        junctions[jid] = Junction(
            id=jid,
            x=x,
            y=y,
            incoming_edges=tuple(sorted(incoming[jid])),
            outgoing_edges=tuple(sorted(outgoing[jid])),
            junction_type=jtype,
        )
    return RoadNetwork(projection=projection, junctions=junctions, edges=edges)


def serialize_network(net: RoadNetwork) -> str:
    """Write the model back out as network XML (parse -> serialize is a fixed point)."""
    proj = net.projection
    if proj.kind == UTM:
        hemi = "" if proj.northern_hemisphere else " +south"
        proj_str = f"+proj=utm +zone={proj.utm_zone}{hemi} +ellps=WGS84 +units=m +no_defs"
    else:
        proj_str = "!"
    root = ET.Element("net")
    ET.SubElement(
        root,
        "location",
        # repr round-trips floats exactly; parse(serialize(m)) must equal m
        netOffset=",".join(repr(v) for v in proj.net_offset),
        convBoundary=",".join(repr(v) for v in proj.conv_boundary),
        origBoundary=",".join(repr(v) for v in proj.orig_boundary),
        projParameter=proj_str,
    )
    for edge in sorted(net.edges.values(), key=lambda e: e.id):
        attrs = {"id": edge.id}
        if edge.function == INTERNAL:
            attrs["function"] = INTERNAL
        if edge.from_junction:
            attrs["from"] = edge.from_junction
        if edge.to_junction:
            attrs["to"] = edge.to_junction
        if edge.type_string:
            attrs["type"] = edge.type_string
        attrs["numLanes"] = str(edge.lane_count)
        ET.SubElement(root, "edge", attrs)
    for j in sorted(net.junctions.values(), key=lambda j: j.id):
        ET.SubElement(
            root,
            "junction",
            id=j.id,
            type=j.junction_type,
            x=repr(j.x),
            y=repr(j.y),
        )
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def lonlat_to_xy(proj: GeoProjection, lon: float, lat: float) -> tuple[float, float]:
    """Convert geographic coordinates into the network frame."""
    if not -90.0 <= lat <= 90.0:
        raise ProjectionError(f"latitude {lat} outside [-90, 90]")
    if not -180.0 <= lon <= 180.0:
        raise ProjectionError(f"longitude {lon} outside [-180, 180]")
    ox, oy = proj.net_offset
    if proj.kind == IDENTITY:
        return (lon + ox, lat + oy)
    easting, northing = utm.utm_forward(proj.utm_zone, proj.northern_hemisphere, lon, lat)
    return (easting + ox, northing + oy)


def bearing_degrees(from_xy: tuple[float, float], to_xy: tuple[float, float]) -> float:
    """Mathematical angle of the displacement vector, degrees in [0, 360).

    0 points along +x (east), 90 along +y (north).
    """
    dx = to_xy[0] - from_xy[0]
    dy = to_xy[1] - from_xy[1]
    if dx == 0.0 and dy == 0.0:
        raise GeometryError("degenerate bearing: identical points")
    angle = math.degrees(math.atan2(dy, dx)) % 360.0
    return 0.0 if angle >= 360.0 else angle
