"""Directory-backed scenario store.

One subdirectory per scenario holding a JSON record plus the build artifacts;
records survive process restarts. Access is serialized per scenario id.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field

from .errors import PipelineError
from .manifest import PipelineManifest

DRAFT = "draft"
BUILT = "built"
FAILED = "failed"


class UnknownScenarioError(PipelineError):
    category = "unknown-scenario"


class BuildInProgressError(PipelineError):
    category = "build-running"


@dataclass
class ScenarioRecord:
    scenario_id: str
    manifest: dict
    status: str = DRAFT
    artifacts: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "manifest": self.manifest,
            "status": self.status,
            "artifacts": self.artifacts,
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioRecord":
        return cls(
            scenario_id=raw["scenario_id"],
            manifest=raw["manifest"],
            status=raw.get("status", DRAFT),
            artifacts=raw.get("artifacts", {}),
            diagnostics=raw.get("diagnostics", []),
        )


class ScenarioStore:
    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._building: set[str] = set()

    def _lock_for(self, scenario_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(scenario_id, threading.Lock())

    def scenario_dir(self, scenario_id: str) -> str:
        return os.path.join(self.root, scenario_id)

    def _record_path(self, scenario_id: str) -> str:
        return os.path.join(self.scenario_dir(scenario_id), "record.json")

    def create(self, manifest: PipelineManifest) -> ScenarioRecord:
        scenario_id = uuid.uuid4().hex[:12]
        record = ScenarioRecord(scenario_id=scenario_id, manifest=manifest.to_dict())
        os.makedirs(self.scenario_dir(scenario_id), exist_ok=True)
        self._write(record)
        return record

    def get(self, scenario_id: str) -> ScenarioRecord:
        path = self._record_path(scenario_id)
        if not os.path.isfile(path):
            raise UnknownScenarioError(f"unknown scenario {scenario_id!r}")
        with self._lock_for(scenario_id):
            with open(path, encoding="utf-8") as f:
                return ScenarioRecord.from_dict(json.load(f))

    def update(self, record: ScenarioRecord) -> None:
        with self._lock_for(record.scenario_id):
            self._write(record)

    def _write(self, record: ScenarioRecord) -> None:
        path = self._record_path(record.scenario_id)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(record.to_dict(), f, indent=2, sort_keys=True)
        os.replace(tmp, path)

    def list_ids(self) -> list[str]:
        return sorted(
            d for d in os.listdir(self.root)
            if os.path.isfile(self._record_path(d))
        )

    def begin_build(self, scenario_id: str) -> None:
        """Mark a build as running; at most one per scenario."""
        self.get(scenario_id)
        with self._locks_guard:
            if scenario_id in self._building:
                raise BuildInProgressError(f"scenario {scenario_id!r} is already building")
            self._building.add(scenario_id)

    def end_build(self, scenario_id: str) -> None:
        with self._locks_guard:
            self._building.discard(scenario_id)

    def is_building(self, scenario_id: str) -> bool:
        with self._locks_guard:
            return scenario_id in self._building
