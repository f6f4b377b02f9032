"""Pipeline manifest: everything needed to build one scenario.

The same JSON document drives the CLI and the HTTP service. Command-line
flags can fill any field, but on conflict the manifest file wins.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from typing import Mapping

from .demand import CarFollowModel, VehicleTypeConfig, default_vehicle_types
from .errors import ManifestError
from .mapping import DEFAULT_TOLERANCE_M
from .tmcdata import VehicleClass


@dataclass(frozen=True)
class PipelineManifest:
    intersection_ids: tuple[str, ...]
    window_start: datetime
    window_end: datetime
    network_path: str | None = None
    auto_fetch_network: bool = False
    data_path: str | None = None
    auto_fetch_data: bool = False
    vehicle_types: dict[VehicleClass, VehicleTypeConfig] = field(
        default_factory=default_vehicle_types
    )
    step_length: float = 1.0
    tolerance_m: float = DEFAULT_TOLERANCE_M
    allow_distance_m: float | None = None
    include_untyped_edges: bool = False
    buffer_m: float = 5000.0
    schema_path: str | None = None
    vehroute_output: bool = True

    def __post_init__(self):
        if not self.intersection_ids:
            raise ManifestError("intersection id list is empty")
        if self.window_start >= self.window_end:
            raise ManifestError("window start must precede window end")
        if self.network_path is None and not self.auto_fetch_network:
            raise ManifestError("either a network path or auto_fetch_network is required")
        if self.data_path is None and not self.auto_fetch_data:
            raise ManifestError("either a data path or auto_fetch_data is required")
        if self.step_length <= 0:
            raise ManifestError("step_length must be positive")

    @classmethod
    def from_dict(cls, raw: Mapping) -> "PipelineManifest":
        try:
            ids = tuple(str(i) for i in raw["intersection_ids"])
            window = raw["window"]
            start = datetime.fromisoformat(window["start"])
            end = datetime.fromisoformat(window["end"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestError(f"bad manifest: {exc!r}") from exc

        network = raw.get("network") or {}
        data = raw.get("data") or {}
        vtypes = default_vehicle_types()
        for name, overrides in (raw.get("vehicle_types") or {}).items():
            try:
                vclass = VehicleClass(name)
            except ValueError as exc:
                raise ManifestError(f"unknown vehicle class {name!r}") from exc
            base = vtypes[vclass]
            try:
                vtypes[vclass] = VehicleTypeConfig(
                    type_id=overrides.get("type_id", base.type_id),
                    vclass=vclass,
                    length=float(overrides.get("length", base.length)),
                    sigma=float(overrides.get("sigma", base.sigma)),
                    car_follow_model=CarFollowModel(
                        overrides.get("car_follow_model", base.car_follow_model.value)
                    ),
                )
            except ValueError as exc:
                raise ManifestError(f"bad vehicle type for {name!r}: {exc}") from exc

        allow = raw.get("allow_distance_m")
        return cls(
            intersection_ids=ids,
            window_start=start,
            window_end=end,
            network_path=network.get("path"),
            auto_fetch_network=bool(network.get("auto_fetch", False)),
            data_path=data.get("path"),
            auto_fetch_data=bool(data.get("auto_fetch", False)),
            vehicle_types=vtypes,
            step_length=float(raw.get("step_length", 1.0)),
            tolerance_m=float(raw.get("tolerance_m", DEFAULT_TOLERANCE_M)),
            allow_distance_m=None if allow is None else float(allow),
            include_untyped_edges=bool(raw.get("include_untyped_edges", False)),
            buffer_m=float(raw.get("buffer_m", 5000.0)),
            schema_path=raw.get("schema"),
            vehroute_output=bool(raw.get("vehroute_output", True)),
        )

    @classmethod
    def from_json(cls, text: str) -> "PipelineManifest":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"manifest is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ManifestError("manifest must be a JSON object")
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return {
            "intersection_ids": list(self.intersection_ids),
            "window": {
                "start": self.window_start.isoformat(),
                "end": self.window_end.isoformat(),
            },
            "network": {"path": self.network_path, "auto_fetch": self.auto_fetch_network},
            "data": {"path": self.data_path, "auto_fetch": self.auto_fetch_data},
            "vehicle_types": {
                vclass.value: {
                    "type_id": vt.type_id,
                    "length": vt.length,
                    "sigma": vt.sigma,
                    "car_follow_model": vt.car_follow_model.value,
                }
                for vclass, vt in sorted(self.vehicle_types.items(), key=lambda kv: kv[0].value)
            },
            "step_length": self.step_length,
            "tolerance_m": self.tolerance_m,
            "allow_distance_m": self.allow_distance_m,
            "include_untyped_edges": self.include_untyped_edges,
            "buffer_m": self.buffer_m,
            "schema": self.schema_path,
            "vehroute_output": self.vehroute_output,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
