"""Fetch a map extract around the selected intersections and convert it into
the simulator's network format via the external conversion tool.

All network and process access goes through injected capabilities so the
module itself performs no ambient I/O.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Sequence

from .errors import (
    BoundingBoxError,
    BoundingBoxTooLarge,
    ConversionError,
    RateLimitError,
    TransportError,
)
from .transport import HttpFetcher, ProcessRunner

DEFAULT_BUFFER_M = 5000.0
METERS_PER_DEGREE_LAT = 111320.0


@dataclass(frozen=True)
class BoundingBox:
    lon_min: float
    lat_min: float
    lon_max: float
    lat_max: float

    def __post_init__(self):
        if self.lon_min >= self.lon_max or self.lat_min >= self.lat_max:
            raise BoundingBoxError("zero-area box")
        if not (-180.0 <= self.lon_min and self.lon_max <= 180.0):
            raise BoundingBoxError("box longitude outside world bounds")
        if not (-90.0 <= self.lat_min and self.lat_max <= 90.0):
            raise BoundingBoxError("box latitude outside world bounds")

    @property
    def area_deg2(self) -> float:
        return (self.lon_max - self.lon_min) * (self.lat_max - self.lat_min)


def compute_bbox(points: Sequence[tuple[float, float]], buffer: float = DEFAULT_BUFFER_M) -> BoundingBox:
    """Axis-aligned box around (lon, lat) points, expanded by a metre buffer.

    The buffer is converted with the spherical approximation: metres per
    degree of latitude is constant, longitude shrinks with cos(mean lat).
    """
    if not points:
        raise BoundingBoxError("no points to bound")
    if buffer < 0:
        raise BoundingBoxError("buffer must be non-negative")
    lons = [p[0] for p in points]
    lats = [p[1] for p in points]
    mean_lat = sum(lats) / len(lats)
    dlat = buffer / METERS_PER_DEGREE_LAT
    dlon = dlat / math.cos(math.radians(mean_lat))
    return BoundingBox(
        lon_min=max(-180.0, min(lons) - dlon),
        lat_min=max(-90.0, min(lats) - dlat),
        lon_max=min(180.0, max(lons) + dlon),
        lat_max=min(90.0, max(lats) + dlat),
    )


@dataclass(frozen=True)
class OsmApiConfig:
    url_template: str = (
        "https://api.openstreetmap.org/api/0.6/map"
        "?bbox={lon_min},{lat_min},{lon_max},{lat_max}"
    )
    # The public map API rejects requests over 0.25 square degrees.
    max_area_deg2: float = 0.25


def fetch_osm(bbox: BoundingBox, http: HttpFetcher, config: OsmApiConfig | None = None) -> str:
    """Download the raw map XML for a bounding box, unmodified."""
    config = config or OsmApiConfig()
    if bbox.area_deg2 > config.max_area_deg2:
        raise BoundingBoxTooLarge(
            f"box spans {bbox.area_deg2:.4f} square degrees, over the "
            f"{config.max_area_deg2} limit; no request issued"
        )
    url = config.url_template.format(
        lon_min=bbox.lon_min, lat_min=bbox.lat_min, lon_max=bbox.lon_max, lat_max=bbox.lat_max
    )
    response = http.get(url)
    if response.status == 429:
        raise RateLimitError("map API rate limit hit", status=429)
    if response.status != 200:
        raise TransportError(f"map API returned HTTP {response.status}", status=response.status)
    return response.body


@dataclass(frozen=True)
class NetconvertConfig:
    """Command-line contract for the external conversion tool."""

    executable: str = "netconvert"
    input_flag: str = "--osm-files"
    output_flag: str = "--output-file"
    extra_args: tuple[str, ...] = (
        "--geometry.remove",
        "--roundabouts.guess",
        "--ramps.guess",
        "--junctions.join",
        "--tls.guess-signals",
        "--osm.keep-edge-type",
    )


def convert_network(
    osm_path: str,
    net_path: str,
    runner: ProcessRunner,
    config: NetconvertConfig | None = None,
) -> str:
    """Run the conversion tool on a map extract; returns the network path."""
    config = config or NetconvertConfig()
    if not os.path.isfile(osm_path):
        raise ConversionError(f"input map file {osm_path!r} does not exist")
    args = [
        config.executable,
        config.input_flag,
        osm_path,
        config.output_flag,
        net_path,
        *config.extra_args,
    ]
    result = runner.run(args)
    if result.returncode != 0:
        raise ConversionError(
            f"conversion tool exited {result.returncode}", stderr=result.stderr
        )
    return net_path
