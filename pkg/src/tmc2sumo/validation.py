"""Reconstruct turning-movement counts from a simulation and compare them
against the input data.

Two sources of simulated vehicle ids are supported: a vehroute output file
(offline, the default for CI) and a live TraCI session. Movement attribution
comes entirely from the vehicle id, which embeds the flow id.
"""

from __future__ import annotations

import csv
import io
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Iterable, Sequence

from .demand import CarFollowModel, FlowSpec, VehicleTypeConfig, parse_vehicle_id
from .errors import ComparisonError, VehicleIdError, VehrouteParseError
from .tmcdata import CountBin, MovementKey, VehicleClass


@dataclass(frozen=True)
class VehicleRecord:
    vehicle_id: str
    depart: float
    edges: tuple[str, ...]


@dataclass(frozen=True)
class ParsedVehroutes:
    vehicles: tuple[VehicleRecord, ...]
    diagnostics: tuple[str, ...] = ()


def parse_vehroutes(xml_text: str) -> ParsedVehroutes:
    """Parse simulator vehroute output into one record per vehicle."""
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise VehrouteParseError(f"malformed vehroute XML: {exc}") from exc

    vehicles: list[VehicleRecord] = []
    diagnostics: list[str] = []
    for el in root.iter("vehicle"):
        vid = el.get("id")
        if vid is None:
            diagnostics.append("vehicle element without id skipped")
            continue
        route = el.find("route")
        if route is None:
            # Rerouted vehicles nest the final route in a distribution.
            dist = el.find("routeDistribution")
            if dist is not None:
                route = dist.find("route")
        if route is None or not (route.get("edges") or "").strip():
            diagnostics.append(f"vehicle {vid!r} has no route; skipped")
            continue
        try:
            depart = float(el.get("depart", "0"))
        except ValueError:
            diagnostics.append(f"vehicle {vid!r} has unparseable depart; skipped")
            continue
        vehicles.append(
            VehicleRecord(
                vehicle_id=vid,
                depart=depart,
                edges=tuple(route.get("edges", "").split()),
            )
        )
    return ParsedVehroutes(vehicles=tuple(vehicles), diagnostics=tuple(diagnostics))


@dataclass(frozen=True)
class SimulatedCounts:
    """Per-bin movement counts recovered from simulated vehicle ids."""

    intersection_id: str
    bins: tuple[tuple[int, dict[MovementKey, int]], ...]
    diagnostics: tuple[str, ...] = ()

    def count(self, bin_index: int, key: MovementKey) -> int:
        for idx, counts in self.bins:
            if idx == bin_index:
                return counts.get(key, 0)
        return 0


def reconstruct_counts(
    vehicle_ids: Iterable[str],
    bin_count: int,
    intersection_id: str | None = None,
) -> SimulatedCounts:
    """Count distinct vehicles per (movement, bin) from their ids.

    Duplicate occurrences of the same vehicle id collapse to one; ids that do
    not conform to the flow-id grammar are collected as diagnostics. When
    ``intersection_id`` is given, ids for other intersections are ignored;
    otherwise all ids must belong to a single intersection.
    """
    diagnostics: list[str] = []
    seen: set[str] = set()
    tallies: dict[int, dict[MovementKey, int]] = {i: {} for i in range(bin_count)}
    inferred: str | None = None

    for vid in vehicle_ids:
        if vid in seen:
            continue
        try:
            iid, key, bin_index = parse_vehicle_id(vid)
        except VehicleIdError:
            diagnostics.append(f"unrecognized vehicle id {vid!r}")
            continue
        if intersection_id is not None:
            if iid != str(intersection_id):
                continue
        else:
            if inferred is None:
                inferred = iid
            elif iid != inferred:
                raise ValueError(
                    f"vehicle ids span intersections {inferred!r} and {iid!r}; "
                    "pass intersection_id explicitly"
                )
        if bin_index >= bin_count:
            diagnostics.append(
                f"vehicle {vid!r} references bin {bin_index} outside 0..{bin_count - 1}"
            )
            continue
        seen.add(vid)
        bucket = tallies[bin_index]
        bucket[key] = bucket.get(key, 0) + 1

    resolved = str(intersection_id) if intersection_id is not None else (inferred or "")
    return SimulatedCounts(
        intersection_id=resolved,
        bins=tuple((i, tallies[i]) for i in range(bin_count)),
        diagnostics=tuple(diagnostics),
    )


def reconstruct_all(vehicle_ids: Iterable[str], bin_count: int) -> dict[str, SimulatedCounts]:
    """Group ids by the intersection they encode and reconstruct each."""
    ids = list(vehicle_ids)
    intersections: set[str] = set()
    for vid in ids:
        try:
            iid, _, _ = parse_vehicle_id(vid)
        except VehicleIdError:
            continue
        intersections.add(iid)
    return {
        iid: reconstruct_counts(ids, bin_count, intersection_id=iid)
        for iid in sorted(intersections)
    }


@dataclass(frozen=True)
class ComparisonRow:
    key: MovementKey
    bin_index: int
    real: int
    simulated: int

    @property
    def abs_diff(self) -> int:
        return abs(self.real - self.simulated)

    @property
    def pct_diff(self) -> float | None:
        if self.real == 0:
            return None
        return 100.0 * self.abs_diff / self.real


@dataclass(frozen=True)
class ComparisonReport:
    intersection_id: str
    rows: tuple[ComparisonRow, ...]
    real_total: int
    simulated_total: int

    @property
    def abs_diff_total(self) -> int:
        return sum(r.abs_diff for r in self.rows)

    @property
    def max_abs_diff(self) -> int:
        return max((r.abs_diff for r in self.rows), default=0)

    @property
    def all_zero(self) -> bool:
        return all(r.abs_diff == 0 for r in self.rows)


_KEY_ORDER = {c: i for i, c in enumerate("ENWS")}
_TURN_ORDER = {t: i for i, t in enumerate("LTR")}


def _row_sort_key(row: ComparisonRow):
    return (
        row.bin_index,
        _KEY_ORDER[row.key.approach.letter],
        _TURN_ORDER[row.key.turn.letter],
        row.key.vclass.value,
    )


def compare(real: Sequence[CountBin], sim: SimulatedCounts) -> ComparisonReport:
    """Line up real and simulated counts per (movement, bin).

    Keys present on either side produce a row; the missing side counts as
    zero. The bins must describe the same intersection and the same number of
    bins, in order.
    """
    if not real:
        raise ComparisonError("no real bins to compare against")
    ids = {b.intersection_id for b in real}
    if len(ids) > 1:
        raise ComparisonError(f"real bins span multiple intersections: {sorted(ids)}")
    intersection_id = next(iter(ids))
    if sim.intersection_id and sim.intersection_id != intersection_id:
        raise ComparisonError(
            f"simulated counts are for {sim.intersection_id!r}, real for {intersection_id!r}"
        )
    if len(real) != len(sim.bins):
        raise ComparisonError(
            f"bin structure mismatch: {len(real)} real bins, {len(sim.bins)} simulated"
        )

    ordered = sorted(real, key=lambda b: b.bin_start)
    rows: list[ComparisonRow] = []
    for bin_index, real_bin in enumerate(ordered):
        sim_counts = dict(sim.bins[bin_index][1])
        keys = set(real_bin.counts) | set(sim_counts)
        for key in keys:
            rows.append(
                ComparisonRow(
                    key=key,
                    bin_index=bin_index,
                    real=real_bin.count(key),
                    simulated=sim_counts.get(key, 0),
                )
            )
    rows.sort(key=_row_sort_key)
    return ComparisonReport(
        intersection_id=intersection_id,
        rows=tuple(rows),
        real_total=sum(b.total() for b in ordered),
        simulated_total=sum(sum(c.values()) for _, c in sim.bins),
    )


CSV_COLUMNS = [
    "intersection_id",
    "bin_index",
    "approach",
    "turn",
    "vclass",
    "real",
    "simulated",
    "abs_diff",
    "pct_diff",
]


def report_to_csv(reports: ComparisonReport | Sequence[ComparisonReport]) -> str:
    """Delimited export, one row per (movement, bin); pct_diff blank when real is zero."""
    if isinstance(reports, ComparisonReport):
        reports = [reports]
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for report in reports:
        for row in report.rows:
            writer.writerow(
                [
                    report.intersection_id,
                    row.bin_index,
                    row.key.approach.value,
                    row.key.turn.value,
                    row.key.vclass.value,
                    row.real,
                    row.simulated,
                    row.abs_diff,
                    "" if row.pct_diff is None else f"{row.pct_diff:.1f}",
                ]
            )
    return out.getvalue()


def report_to_json(reports: ComparisonReport | Sequence[ComparisonReport]) -> str:
    if isinstance(reports, ComparisonReport):
        reports = [reports]
    payload = [
        {
            "intersection_id": report.intersection_id,
            "totals": {
                "real": report.real_total,
                "simulated": report.simulated_total,
                "abs_diff": report.abs_diff_total,
            },
            "rows": [
                {
                    "bin_index": row.bin_index,
                    "approach": row.key.approach.value,
                    "turn": row.key.turn.value,
                    "vclass": row.key.vclass.value,
                    "real": row.real,
                    "simulated": row.simulated,
                    "abs_diff": row.abs_diff,
                    "pct_diff": row.pct_diff,
                }
                for row in report.rows
            ],
        }
        for report in reports
    ]
    return json.dumps(payload, indent=2) + "\n"


def parse_routes_xml(xml_text: str) -> tuple[list[FlowSpec], list[VehicleTypeConfig]]:
    """Read a route file back into flow and vehicle-type objects.

    This is the validator's own parser: it doubles as the round-trip check on
    the emitter and as the source of the expected counts when validating.
    """
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise VehrouteParseError(f"malformed routes XML: {exc}") from exc

    vtypes: list[VehicleTypeConfig] = []
    for el in root.iter("vType"):
        sumo_class = el.get("vClass", "passenger")
        for vclass, name in (("car", "passenger"), ("truck", "truck"), ("bus", "bus")):
            if name == sumo_class:
                vtypes.append(
                    VehicleTypeConfig(
                        type_id=el.get("id", vclass),
                        vclass=VehicleClass(vclass),
                        length=float(el.get("length", "5")),
                        sigma=float(el.get("sigma", "0.5")),
                        car_follow_model=CarFollowModel(el.get("carFollowModel", "Krauss")),
                    )
                )
                break

    flows: list[FlowSpec] = []
    for el in root.iter("flow"):
        flows.append(
            FlowSpec(
                flow_id=el.get("id", ""),
                from_edge=el.get("from", ""),
                to_edge=el.get("to", ""),
                begin=int(float(el.get("begin", "0"))),
                end=int(float(el.get("end", "0"))),
                count=int(el.get("number", "0")),
                vtype=el.get("type", ""),
            )
        )
    return flows, vtypes


def real_bins_from_flows(flows: Sequence[FlowSpec]) -> dict[str, list[CountBin]]:
    """Recover the input counts from a route file's flows, per intersection.

    Flow ids encode (intersection, movement, bin); numbers carry the counts.
    Bin timestamps are synthesized from the begin offsets since only bin
    structure matters for comparison.
    """
    from datetime import datetime, timedelta

    epoch = datetime(2000, 1, 1)
    staged: dict[str, dict[int, tuple[int, int, dict[MovementKey, int]]]] = {}
    for flow in flows:
        iid, key, bin_index = parse_vehicle_id(flow.flow_id)
        per_bin = staged.setdefault(iid, {})
        begin, end, counts = per_bin.setdefault(bin_index, (flow.begin, flow.end, {}))
        if (begin, end) != (flow.begin, flow.end):
            raise ComparisonError(
                f"flows disagree on bin {bin_index} bounds for intersection {iid!r}"
            )
        counts[key] = counts.get(key, 0) + flow.count

    result: dict[str, list[CountBin]] = {}
    for iid, per_bin in staged.items():
        first_begin, first_end, _ = next(iter(per_bin.values()))
        duration = first_end - first_begin
        bins = []
        # Bins whose every movement was zero emitted no flows; fill them in so
        # the bin structure matches the original window.
        for bin_index in range(max(per_bin) + 1):
            if bin_index in per_bin:
                begin, end, counts = per_bin[bin_index]
            else:
                begin, end, counts = bin_index * duration, (bin_index + 1) * duration, {}
            bins.append(
                CountBin(
                    intersection_id=iid,
                    bin_start=epoch + timedelta(seconds=begin),
                    duration=end - begin,
                    counts=counts,
                )
            )
        result[iid] = bins
    return result
