"""Turning-movement-count ingestion, windowing, and transformation.

Counts arrive as one CSV row (or API record) per intersection per time bin,
with one column per (approach, vehicle class, turn) movement. A pluggable
SchemaMapping names those columns; the City of Toronto layout ships as
package data. Timestamps are naive local civil time throughout.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum
from fractions import Fraction
from importlib import resources
from typing import Iterable, Mapping, Sequence

from .errors import SchemaDriftError, SchemaError, TransportError, WindowDataError, WindowAlignmentError
from .errors import RateLimitError
from .mapping import Cardinal
from .transport import HttpFetcher


class Turn(Enum):
    LEFT = "left"
    THROUGH = "through"
    RIGHT = "right"

    @property
    def letter(self) -> str:
        return {"left": "L", "through": "T", "right": "R"}[self.value]

    @classmethod
    def from_letter(cls, letter: str) -> "Turn":
        for t in cls:
            if t.letter == letter:
                return t
        raise ValueError(f"no turn for letter {letter!r}")


class VehicleClass(Enum):
    CAR = "car"
    TRUCK = "truck"
    BUS = "bus"


@dataclass(frozen=True)
class MovementKey:
    """One turning movement: travel direction, turn, vehicle class."""

    approach: Cardinal
    turn: Turn
    vclass: VehicleClass

    def label(self) -> str:
        return f"{self.approach.value}.{self.turn.value}.{self.vclass.value}"

    @classmethod
    def from_label(cls, label: str) -> "MovementKey":
        approach, turn, vclass = label.split(".")
        return cls(Cardinal(approach), Turn(turn), VehicleClass(vclass))


ALL_MOVEMENT_KEYS: tuple[MovementKey, ...] = tuple(
    MovementKey(a, t, v) for a in Cardinal for t in Turn for v in VehicleClass
)


@dataclass(frozen=True)
class CountBin:
    """Counts for one intersection over one time bin; absent keys mean zero."""

    intersection_id: str
    bin_start: datetime
    duration: int = 900
    counts: Mapping[MovementKey, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("bin duration must be positive")
        for key, value in self.counts.items():
            if value < 0:
                raise ValueError(f"negative count for {key.label()}")

    @property
    def bin_end(self) -> datetime:
        return self.bin_start + timedelta(seconds=self.duration)

    def count(self, key: MovementKey) -> int:
        return self.counts.get(key, 0)

    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class SchemaMapping:
    """Column layout of a count table.

    Every one of the 36 movement keys must be mapped to a column name or
    explicitly declared absent with None (absent means zero).
    """

    id_column: str
    time_column: str
    movement_columns: Mapping[MovementKey, str | None]
    bin_seconds: int = 900
    lon_column: str | None = None
    lat_column: str | None = None

    def __post_init__(self):
        missing = [k.label() for k in ALL_MOVEMENT_KEYS if k not in self.movement_columns]
        if missing:
            raise SchemaError(f"schema leaves movement columns undeclared: {missing}")
        if self.bin_seconds <= 0:
            raise SchemaError("bin_seconds must be positive")

    @classmethod
    def from_dict(cls, raw: Mapping) -> "SchemaMapping":
        try:
            columns = {
                MovementKey.from_label(label): name
                for label, name in raw["movement_columns"].items()
            }
            return cls(
                id_column=raw["id_column"],
                time_column=raw["time_column"],
                movement_columns=columns,
                bin_seconds=int(raw.get("bin_seconds", 900)),
                lon_column=raw.get("lon_column"),
                lat_column=raw.get("lat_column"),
            )
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"bad schema mapping: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "id_column": self.id_column,
            "time_column": self.time_column,
            "bin_seconds": self.bin_seconds,
            "lon_column": self.lon_column,
            "lat_column": self.lat_column,
            "movement_columns": {
                key.label(): name for key, name in self.movement_columns.items()
            },
        }

    @classmethod
    def toronto_default(cls) -> "SchemaMapping":
        raw = json.loads(
            resources.files("tmc2sumo.data").joinpath("toronto_tmc_schema.json").read_text()
        )
        return cls.from_dict(raw)


@dataclass(frozen=True)
class RowDiagnostic:
    row: int
    message: str

    def __str__(self):
        return f"row {self.row}: {self.message}"


@dataclass(frozen=True)
class TmcDataset:
    """Immutable collection of count bins plus per-intersection metadata."""

    bins: tuple[CountBin, ...]
    schema: SchemaMapping
    coordinates: Mapping[str, tuple[float, float]] = field(default_factory=dict)
    diagnostics: tuple[RowDiagnostic, ...] = ()

    def intersection_ids(self) -> list[str]:
        return sorted({b.intersection_id for b in self.bins})

    def bins_for(self, intersection_id: str) -> list[CountBin]:
        return [b for b in self.bins if b.intersection_id == str(intersection_id)]

    @property
    def available_ranges(self) -> dict[str, list[tuple[datetime, datetime]]]:
        return available_time_range(self, self.intersection_ids())


def _parse_timestamp(raw: str) -> datetime:
    return datetime.fromisoformat(str(raw).strip())


def _rows_to_dataset(rows: Iterable[Mapping[str, object]], schema: SchemaMapping,
                     first_row_number: int = 2) -> TmcDataset:
    """Shared core for CSV rows and API records (dicts keyed by column name)."""
    bins: list[CountBin] = []
    diagnostics: list[RowDiagnostic] = []
    coordinates: dict[str, tuple[float, float]] = {}
    seen: set[tuple[str, datetime]] = set()

    for row_no, row in enumerate(rows, start=first_row_number):
        raw_id = row.get(schema.id_column)
        if raw_id is None or str(raw_id).strip() == "":
            diagnostics.append(RowDiagnostic(row_no, "missing intersection id"))
            continue
        intersection_id = str(raw_id).strip()
        # Numeric ids arrive as 13463414.0 from some exports; normalize.
        if intersection_id.endswith(".0") and intersection_id[:-2].isdigit():
            intersection_id = intersection_id[:-2]

        try:
            bin_start = _parse_timestamp(row[schema.time_column])
        except (KeyError, ValueError, TypeError):
            diagnostics.append(
                RowDiagnostic(row_no, f"unparseable timestamp {row.get(schema.time_column)!r}")
            )
            continue

        counts: dict[MovementKey, int] = {}
        bad = None
        for key in ALL_MOVEMENT_KEYS:
            column = schema.movement_columns[key]
            if column is None:
                continue
            raw = row.get(column)
            if raw is None or str(raw).strip() == "":
                value = 0
            else:
                try:
                    value = int(float(raw))
                except (ValueError, TypeError):
                    bad = f"non-numeric count {raw!r} in column {column!r}"
                    break
                if float(raw) != value:
                    bad = f"non-integer count {raw!r} in column {column!r}"
                    break
            if value < 0:
                bad = f"negative count {value} in column {column!r}"
                break
            if value:
                counts[key] = value
        if bad:
            diagnostics.append(RowDiagnostic(row_no, bad))
            continue

        dedup_key = (intersection_id, bin_start)
        if dedup_key in seen:
            diagnostics.append(
                RowDiagnostic(row_no, f"duplicate bin for {intersection_id} at {bin_start}")
            )
            continue
        seen.add(dedup_key)

        if schema.lon_column and schema.lat_column and intersection_id not in coordinates:
            try:
                lon = float(row[schema.lon_column])  # type: ignore[arg-type]
                lat = float(row[schema.lat_column])  # type: ignore[arg-type]
                coordinates[intersection_id] = (lon, lat)
            except (KeyError, ValueError, TypeError):
                pass

        bins.append(
            CountBin(
                intersection_id=intersection_id,
                bin_start=bin_start,
                duration=schema.bin_seconds,
                counts=counts,
            )
        )

    bins.sort(key=lambda b: (b.intersection_id, b.bin_start))
    return TmcDataset(
        bins=tuple(bins),
        schema=schema,
        coordinates=coordinates,
        diagnostics=tuple(diagnostics),
    )


def parse_tmc_csv(text: str, schema: SchemaMapping) -> TmcDataset:
    """Parse count CSV text; malformed rows become diagnostics, not crashes."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise SchemaError("missing header row")
    header = set(reader.fieldnames)
    for name, what in ((schema.id_column, "id"), (schema.time_column, "timestamp")):
        if name not in header:
            raise SchemaError(f"{what} column {name!r} not found in header")
    declared = [c for c in schema.movement_columns.values() if c is not None]
    missing = sorted(set(declared) - header)
    if missing:
        raise SchemaError(f"movement columns missing from header: {missing}")
    return _rows_to_dataset(reader, schema)


def serialize_tmc_csv(ds: TmcDataset, schema: SchemaMapping | None = None) -> str:
    """Write a dataset back to CSV under the given schema (default: its own)."""
    schema = schema or ds.schema
    columns = [schema.id_column, schema.time_column]
    if schema.lon_column and schema.lat_column:
        columns += [schema.lon_column, schema.lat_column]
    movement_order = [
        (key, schema.movement_columns[key])
        for key in ALL_MOVEMENT_KEYS
        if schema.movement_columns[key] is not None
    ]
    columns += [name for _, name in movement_order]

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for b in ds.bins:
        row: list[object] = [b.intersection_id, b.bin_start.isoformat(sep=" ")]
        if schema.lon_column and schema.lat_column:
            lon, lat = ds.coordinates.get(b.intersection_id, ("", ""))
            row += [lon, lat]
        row += [b.count(key) for key, _ in movement_order]
        writer.writerow(row)
    return out.getvalue()


def available_time_range(
    ds: TmcDataset, ids: Sequence[str]
) -> dict[str, list[tuple[datetime, datetime]]]:
    """Maximal contiguous spans of bins per intersection; unknown ids map to []."""
    result: dict[str, list[tuple[datetime, datetime]]] = {}
    for raw_id in ids:
        intersection_id = str(raw_id)
        spans: list[tuple[datetime, datetime]] = []
        run_start: datetime | None = None
        prev_end: datetime | None = None
        for b in ds.bins_for(intersection_id):
            if run_start is None:
                run_start = b.bin_start
            elif b.bin_start != prev_end:
                spans.append((run_start, prev_end))
                run_start = b.bin_start
            prev_end = b.bin_end
        if run_start is not None and prev_end is not None:
            spans.append((run_start, prev_end))
        result[intersection_id] = spans
    return result


def slice_window(
    ds: TmcDataset, ids: Sequence[str], start: datetime, end: datetime
) -> list[CountBin]:
    """Bins fully inside [start, end) for the given intersections.

    The window must land on bin boundaries and every expected bin must exist;
    partial coverage is an error rather than silent proration.
    """
    if start >= end:
        raise ValueError("window start must precede window end")
    duration = timedelta(seconds=ds.schema.bin_seconds)

    id_list = [str(i) for i in ids]
    per_id_bins = {i: ds.bins_for(i) for i in id_list}
    if not any(per_id_bins.values()):
        expected = _expected_slots(start, end, duration)
        raise WindowDataError(
            f"no data in window [{start} .. {end}) for intersections {id_list}",
            covered=[],
            missing=expected,
        )

    selected: list[CountBin] = []
    for intersection_id in id_list:
        bins = per_id_bins[intersection_id]
        if not bins:
            raise WindowDataError(
                f"no data in window for intersection {intersection_id}",
                covered=[],
                missing=_expected_slots(start, end, duration),
            )
        phase = bins[0].bin_start
        for point, name in ((start, "start"), (end, "end")):
            off = (point - phase) % duration
            if off:
                below = point - off
                raise WindowAlignmentError(
                    f"window {name} {point} is not on a bin boundary; "
                    f"nearest boundaries are {below} and {below + duration}",
                    nearest_start=below,
                    nearest_end=below + duration,
                )
        expected = _expected_slots(start, end, duration)
        by_start = {b.bin_start: b for b in bins}
        covered = [slot for slot in expected if slot in by_start]
        missing = [slot for slot in expected if slot not in by_start]
        if missing:
            raise WindowDataError(
                f"no data in window for intersection {intersection_id}: "
                f"{len(covered)} of {len(expected)} bins present, "
                f"missing {[s.isoformat() for s in missing]}",
                covered=covered,
                missing=missing,
            )
        selected.extend(by_start[slot] for slot in expected)

    selected.sort(key=lambda b: (b.intersection_id, b.bin_start))
    return selected


def _expected_slots(start: datetime, end: datetime, duration: timedelta) -> list[datetime]:
    slots = []
    t = start
    while t + duration <= end:
        slots.append(t)
        t += duration
    return slots


def scale_counts(
    bins: Sequence[CountBin],
    factor: float | int | Fraction | Mapping[VehicleClass, float | int | Fraction],
) -> list[CountBin]:
    """Scale every count by a factor (global or per vehicle class), rounding half up."""
    if isinstance(factor, Mapping):
        factors = {vc: _as_fraction(factor.get(vc, 1)) for vc in VehicleClass}
    else:
        f = _as_fraction(factor)
        factors = {vc: f for vc in VehicleClass}
    for vc, f in factors.items():
        if f < 0:
            raise ValueError(f"negative scale factor {f} for {vc.value}")

    scaled: list[CountBin] = []
    for b in bins:
        counts = {
            key: _round_half_up(Fraction(value) * factors[key.vclass])
            for key, value in b.counts.items()
        }
        scaled.append(
            CountBin(
                intersection_id=b.intersection_id,
                bin_start=b.bin_start,
                duration=b.duration,
                counts=counts,
            )
        )
    return scaled


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    # Go through the decimal literal so 1.2 means exactly 1.2.
    return Fraction(str(value))


def _round_half_up(value: Fraction) -> int:
    return int(value + Fraction(1, 2)) if value >= 0 else -int(-value + Fraction(1, 2))


@dataclass(frozen=True)
class TorontoApiConfig:
    """Where and how to query the open-data portal; values are environment
    facts that may need updating against the live portal."""

    base_url: str = "https://ckan0.cf.opendata.inter.prod-toronto.ca/api/3/action"
    dataset_name: str = "traffic-volumes-at-intersections-for-all-modes"
    resource_id: str = ""
    page_size: int = 1000


def fetch_toronto_tmc(
    ids: Sequence[str],
    http: HttpFetcher,
    schema: SchemaMapping | None = None,
    config: TorontoApiConfig | None = None,
) -> TmcDataset:
    """Fetch count records for the given intersection ids, following pagination."""
    schema = schema or SchemaMapping.toronto_default()
    config = config or TorontoApiConfig()

    resource_id = config.resource_id or _resolve_resource_id(http, config)

    records: list[dict] = []
    offset = 0
    while True:
        response = http.get(
            f"{config.base_url}/datastore_search",
            params={
                "resource_id": resource_id,
                "limit": config.page_size,
                "offset": offset,
                "filters": json.dumps({schema.id_column: [str(i) for i in ids]}),
            },
        )
        if response.status == 429:
            raise RateLimitError("open-data portal rate limit hit", status=429)
        if response.status != 200:
            raise TransportError(
                f"open-data portal returned HTTP {response.status}", status=response.status
            )
        try:
            payload = response.json()
            result = payload["result"]
            page = result["records"]
            total = int(result.get("total", 0))
        except (ValueError, KeyError, TypeError) as exc:
            raise SchemaDriftError(f"unexpected portal payload shape: {exc}") from exc
        records.extend(page)
        offset += len(page)
        if not page or offset >= total:
            break

    for column in (schema.id_column, schema.time_column):
        if records and column not in records[0]:
            raise SchemaDriftError(
                f"portal records are missing expected column {column!r}", column=column
            )
    return _rows_to_dataset(records, schema, first_row_number=1)


def _resolve_resource_id(http: HttpFetcher, config: TorontoApiConfig) -> str:
    """Look up the datastore resource id of the configured dataset."""
    response = http.get(
        f"{config.base_url}/package_show", params={"id": config.dataset_name}
    )
    if response.status != 200:
        raise TransportError(
            f"package lookup returned HTTP {response.status}", status=response.status
        )
    try:
        resources_list = response.json()["result"]["resources"]
    except (ValueError, KeyError, TypeError) as exc:
        raise SchemaDriftError(f"unexpected package payload: {exc}") from exc
    for resource in resources_list:
        if resource.get("datastore_active"):
            return resource["id"]
    raise SchemaDriftError(
        f"dataset {config.dataset_name!r} has no datastore-backed resource"
    )
