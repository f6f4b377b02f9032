"""Compile windowed count bins into simulator demand files.

Each (bin, movement) with a positive count becomes one flow definition from
the representative incoming edge of the approach direction to the
representative outgoing edge of the exit direction. Flow ids encode the
movement so simulated vehicles can be attributed back to it; the simulator
appends ``.<n>`` per vehicle, which the parser strips.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import DuplicateFlowIdError, FlowCompileError, VehicleIdError
from .mapping import Cardinal, IntersectionBinding
from .tmcdata import CountBin, MovementKey, Turn, VehicleClass


class CarFollowModel(Enum):
    KRAUSS = "Krauss"
    KRAUSS_ORIG = "KraussOrig1"
    IDM = "IDM"
    WIEDEMANN = "Wiedemann"


# Simulator vehicle-class strings differ from the count categories.
SUMO_VCLASS = {
    VehicleClass.CAR: "passenger",
    VehicleClass.TRUCK: "truck",
    VehicleClass.BUS: "bus",
}


@dataclass(frozen=True)
class VehicleTypeConfig:
    type_id: str
    vclass: VehicleClass
    length: float
    sigma: float = 0.5
    car_follow_model: CarFollowModel = CarFollowModel.KRAUSS

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("vehicle length must be positive")
        if not 0.0 <= self.sigma <= 1.0:
            raise ValueError("sigma must be within [0, 1]")


def default_vehicle_types() -> dict[VehicleClass, VehicleTypeConfig]:
    """Conventional simulator defaults; all overridable via configuration."""
    return {
        VehicleClass.CAR: VehicleTypeConfig("car", VehicleClass.CAR, length=5.0),
        VehicleClass.TRUCK: VehicleTypeConfig("truck", VehicleClass.TRUCK, length=7.1),
        VehicleClass.BUS: VehicleTypeConfig("bus", VehicleClass.BUS, length=12.0),
    }


@dataclass(frozen=True)
class FlowSpec:
    flow_id: str
    from_edge: str
    to_edge: str
    begin: int
    end: int
    count: int
    vtype: str

    def __post_init__(self):
        if self.begin >= self.end:
            raise ValueError("flow begin must precede end")
        if self.count < 1:
            raise ValueError("flow count must be at least 1")
        if self.from_edge == self.to_edge:
            raise ValueError("flow endpoints must differ")


@dataclass(frozen=True)
class ScenarioConfig:
    network_path: str
    route_path: str
    begin: int
    end: int
    step_length: float = 1.0
    vehroute_output: str | None = None

    def __post_init__(self):
        if self.begin >= self.end:
            raise ValueError("scenario begin must precede end")
        if self.step_length <= 0:
            raise ValueError("step length must be positive")


_LEFT_OF = {
    Cardinal.NORTH: Cardinal.WEST,
    Cardinal.WEST: Cardinal.SOUTH,
    Cardinal.SOUTH: Cardinal.EAST,
    Cardinal.EAST: Cardinal.NORTH,
}
_RIGHT_OF = {v: k for k, v in _LEFT_OF.items()}


def movement_exit_direction(approach: Cardinal, turn: Turn) -> Cardinal:
    """Exit heading for a vehicle travelling ``approach`` and making ``turn``."""
    if turn is Turn.THROUGH:
        return approach
    if turn is Turn.LEFT:
        return _LEFT_OF[approach]
    return _RIGHT_OF[approach]


_ID_PATTERN = re.compile(
    r"^f_(?P<iid>[^_]+)_(?P<approach>[NESW])(?P<turn>[LTR])_"
    r"(?P<vclass>car|truck|bus)_(?P<bin>\d+)(?:\.\d+)?$"
)


def encode_flow_id(intersection_id: str, key: MovementKey, bin_index: int) -> str:
    """Flow id grammar: f_<id>_<approach><turn>_<vclass>_<bin>."""
    iid = str(intersection_id)
    if "_" in iid or not iid:
        raise VehicleIdError(f"intersection id {iid!r} cannot appear in a flow id")
    if bin_index < 0:
        raise VehicleIdError("bin index must be non-negative")
    return f"f_{iid}_{key.approach.letter}{key.turn.letter}_{key.vclass.value}_{bin_index}"


def parse_vehicle_id(vehicle_id: str) -> tuple[str, MovementKey, int]:
    """Recover (intersection id, movement, bin index) from a vehicle or flow id.

    Accepts the bare flow id or the per-vehicle form with a ``.<n>`` suffix.
    """
    match = _ID_PATTERN.match(vehicle_id)
    if not match:
        raise VehicleIdError(f"vehicle id {vehicle_id!r} does not match the flow-id grammar")
    key = MovementKey(
        approach=Cardinal.from_letter(match.group("approach")),
        turn=Turn.from_letter(match.group("turn")),
        vclass=VehicleClass(match.group("vclass")),
    )
    return match.group("iid"), key, int(match.group("bin"))


def compile_flows(
    binding: IntersectionBinding,
    bins: Sequence[CountBin],
    vtypes: Mapping[VehicleClass, VehicleTypeConfig] | None = None,
    t0: datetime | None = None,
) -> tuple[list[FlowSpec], list[str]]:
    """Turn count bins into flow definitions for one bound intersection.

    Every positive count is either emitted exactly (conservation) or reported
    in the diagnostics when the junction lacks a leg for it. ``t0`` defaults
    to the earliest bin start and becomes simulation second zero.
    """
    vtypes = vtypes or default_vehicle_types()
    for b in bins:
        if b.intersection_id != binding.source_id:
            raise FlowCompileError(
                f"bin for {b.intersection_id!r} passed to binding {binding.source_id!r}"
            )
    ordered = sorted(bins, key=lambda b: b.bin_start)
    if not ordered:
        return [], []
    earliest = ordered[0].bin_start
    if t0 is None:
        t0 = earliest
    elif t0 != earliest:
        raise FlowCompileError(f"t0 {t0} does not match earliest bin start {earliest}")

    flows: list[FlowSpec] = []
    diagnostics: list[str] = []
    for bin_index, b in enumerate(ordered):
        begin = int((b.bin_start - t0).total_seconds())
        end = begin + b.duration
        for key in sorted(b.counts, key=lambda k: k.label()):
            count = b.counts[key]
            if count <= 0:
                continue
            exit_cardinal = movement_exit_direction(key.approach, key.turn)
            from_edge = binding.mapping.representative("incoming", key.approach)
            to_edge = binding.mapping.representative("outgoing", exit_cardinal)
            if from_edge is None:
                diagnostics.append(
                    f"no incoming edge for cardinal {key.approach.value} "
                    f"(movement {key.label()}, bin {bin_index}, count {count})"
                )
                continue
            if to_edge is None:
                diagnostics.append(
                    f"no outgoing edge for cardinal {exit_cardinal.value} "
                    f"(movement {key.label()}, bin {bin_index}, count {count})"
                )
                continue
            flows.append(
                FlowSpec(
                    flow_id=encode_flow_id(binding.source_id, key, bin_index),
                    from_edge=from_edge,
                    to_edge=to_edge,
                    begin=begin,
                    end=end,
                    count=count,
                    vtype=vtypes[key.vclass].type_id,
                )
            )
    return flows, diagnostics


def emit_routes_xml(
    flows: Iterable[FlowSpec],
    vtypes: Iterable[VehicleTypeConfig] | Mapping[VehicleClass, VehicleTypeConfig] | None = None,
) -> str:
    """Route-file XML with vehicle types followed by flows.

    Departure times inside each flow window are the simulator's equally
    spaced begin/end/number semantics; output is deterministic and sorted.
    """
    if vtypes is None:
        vtypes = default_vehicle_types()
    if isinstance(vtypes, Mapping):
        vtypes = list(vtypes.values())
    flows = list(flows)

    seen: set[str] = set()
    for flow in flows:
        if flow.flow_id in seen:
            raise DuplicateFlowIdError(f"duplicate flow id {flow.flow_id!r}")
        seen.add(flow.flow_id)

    root = ET.Element("routes")
    for vt in sorted(vtypes, key=lambda v: v.type_id):
        ET.SubElement(
            root,
            "vType",
            id=vt.type_id,
            vClass=SUMO_VCLASS[vt.vclass],
            length=f"{vt.length:.2f}",
            sigma=f"{vt.sigma:.2f}",
            carFollowModel=vt.car_follow_model.value,
        )
    for flow in sorted(flows, key=lambda f: (f.begin, f.flow_id)):
        ET.SubElement(
            root,
            "flow",
            {
                "id": flow.flow_id,
                "type": flow.vtype,
                "from": flow.from_edge,
                "to": flow.to_edge,
                "begin": str(flow.begin),
                "end": str(flow.end),
                "number": str(flow.count),
            },
        )
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def emit_sumocfg(sc: ScenarioConfig) -> str:
    """Simulator configuration XML linking the network and route files."""
    if not sc.network_path or not sc.route_path:
        raise ValueError("network and route paths must be non-empty")
    root = ET.Element("configuration")
    inputs = ET.SubElement(root, "input")
    ET.SubElement(inputs, "net-file", value=sc.network_path)
    ET.SubElement(inputs, "route-files", value=sc.route_path)
    time_el = ET.SubElement(root, "time")
    ET.SubElement(time_el, "begin", value=str(sc.begin))
    ET.SubElement(time_el, "end", value=str(sc.end))
    ET.SubElement(time_el, "step-length", value=repr(sc.step_length))
    if sc.vehroute_output:
        output = ET.SubElement(root, "output")
        ET.SubElement(output, "vehroute-output", value=sc.vehroute_output)
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"
