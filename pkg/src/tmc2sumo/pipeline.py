"""Shared pipeline core: the CLI and the HTTP service are thin wrappers over
these functions, so both surfaces produce identical artifacts.
"""

from __future__ import annotations

import json
import os
import shutil
from dataclasses import dataclass, field
from datetime import datetime

from .demand import ScenarioConfig, compile_flows, emit_routes_xml, emit_sumocfg
from .errors import ManifestError, PipelineError, ToleranceExceeded
from .manifest import PipelineManifest
from .mapping import EdgeFilterPolicy, bind_intersection
from .netmodel import RoadNetwork, parse_network
from .osmfetch import compute_bbox, convert_network, fetch_osm
from .tmcdata import (
    SchemaMapping,
    TmcDataset,
    available_time_range,
    fetch_toronto_tmc,
    parse_tmc_csv,
    slice_window,
)
from .transport import HttpFetcher, ProcessRunner, RequestsFetcher, SubprocessRunner
from .validation import (
    ComparisonReport,
    compare,
    parse_routes_xml,
    parse_vehroutes,
    real_bins_from_flows,
    reconstruct_counts,
)

NETWORK_FILENAME = "scenario.net.xml"
ROUTES_FILENAME = "scenario.rou.xml"
CONFIG_FILENAME = "scenario.sumocfg"
MANIFEST_FILENAME = "manifest.json"
VEHROUTE_FILENAME = "vehroutes.out.xml"


@dataclass
class BuildArtifacts:
    network_path: str
    routes_path: str
    config_path: str
    manifest_path: str
    diagnostics: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "network": self.network_path,
            "routes": self.routes_path,
            "config": self.config_path,
            "manifest": self.manifest_path,
        }


def load_schema(manifest: PipelineManifest) -> SchemaMapping:
    if manifest.schema_path:
        with open(manifest.schema_path, encoding="utf-8") as f:
            return SchemaMapping.from_dict(json.load(f))
    return SchemaMapping.toronto_default()


def load_dataset(manifest: PipelineManifest, http: HttpFetcher | None = None) -> TmcDataset:
    schema = load_schema(manifest)
    if manifest.data_path:
        with open(manifest.data_path, encoding="utf-8") as f:
            return parse_tmc_csv(f.read(), schema)
    fetcher = http or RequestsFetcher()
    return fetch_toronto_tmc(manifest.intersection_ids, fetcher, schema=schema)


def load_network(
    manifest: PipelineManifest,
    workdir: str,
    dataset: TmcDataset | None = None,
    http: HttpFetcher | None = None,
    runner: ProcessRunner | None = None,
) -> tuple[RoadNetwork, str]:
    """Returns the parsed network and the path of its source file."""
    if manifest.network_path:
        with open(manifest.network_path, encoding="utf-8") as f:
            return parse_network(f.read()), manifest.network_path
    if dataset is None:
        raise ManifestError("auto-fetching a network requires the dataset for coordinates")
    points = []
    for iid in manifest.intersection_ids:
        coord = dataset.coordinates.get(str(iid))
        if coord is None:
            raise ManifestError(f"no coordinates for intersection {iid} in the data")
        points.append(coord)
    bbox = compute_bbox(points, buffer=manifest.buffer_m)
    fetcher = http or RequestsFetcher()
    osm_text = fetch_osm(bbox, fetcher)
    osm_path = os.path.join(workdir, "extract.osm.xml")
    with open(osm_path, "w", encoding="utf-8") as f:
        f.write(osm_text)
    net_path = os.path.join(workdir, NETWORK_FILENAME)
    convert_network(osm_path, net_path, runner or SubprocessRunner())
    with open(net_path, encoding="utf-8") as f:
        return parse_network(f.read()), net_path


def compute_timeranges(
    manifest: PipelineManifest, http: HttpFetcher | None = None
) -> dict[str, list[tuple[datetime, datetime]]]:
    dataset = load_dataset(manifest, http=http)
    return available_time_range(dataset, list(manifest.intersection_ids))


def build_scenario(
    manifest: PipelineManifest,
    out_dir: str,
    http: HttpFetcher | None = None,
    runner: ProcessRunner | None = None,
) -> BuildArtifacts:
    """Run the full pipeline and write the scenario files into ``out_dir``.

    Raises ToleranceExceeded when an intersection lands farther from its
    junction than the tolerance, unless the manifest's allow_distance_m
    covers the distance.
    """
    os.makedirs(out_dir, exist_ok=True)
    dataset = load_dataset(manifest, http=http)
    network, net_source = load_network(
        manifest, out_dir, dataset=dataset, http=http, runner=runner
    )

    bins = slice_window(
        dataset, list(manifest.intersection_ids), manifest.window_start, manifest.window_end
    )

    policy = EdgeFilterPolicy(include_untyped=manifest.include_untyped_edges)
    diagnostics: list[str] = []
    all_flows = []
    for iid in manifest.intersection_ids:
        coord = dataset.coordinates.get(str(iid))
        if coord is None:
            raise ManifestError(f"no coordinates for intersection {iid} in the data")
        tol = manifest.tolerance_m
        try:
            binding = bind_intersection(
                network, str(iid), coord[0], coord[1], tol=tol, policy=policy
            )
        except ToleranceExceeded as exc:
            if manifest.allow_distance_m is not None and exc.distance <= manifest.allow_distance_m:
                binding = bind_intersection(
                    network, str(iid), coord[0], coord[1],
                    tol=manifest.allow_distance_m, policy=policy,
                )
                diagnostics.append(
                    f"intersection {iid}: accepted junction {exc.junction_id!r} at "
                    f"{exc.distance:.2f} m over the {tol:.2f} m tolerance"
                )
            else:
                raise
        diagnostics.extend(binding.mapping.diagnostics)
        own_bins = [b for b in bins if b.intersection_id == str(iid)]
        flows, flow_diags = compile_flows(binding, own_bins, manifest.vehicle_types)
        diagnostics.extend(f"intersection {iid}: {d}" for d in flow_diags)
        all_flows.extend(flows)

    window_seconds = int((manifest.window_end - manifest.window_start).total_seconds())

    net_path = os.path.join(out_dir, NETWORK_FILENAME)
    if os.path.abspath(net_source) != os.path.abspath(net_path):
        shutil.copyfile(net_source, net_path)
    routes_path = os.path.join(out_dir, ROUTES_FILENAME)
    with open(routes_path, "w", encoding="utf-8") as f:
        f.write(emit_routes_xml(all_flows, manifest.vehicle_types))
    config_path = os.path.join(out_dir, CONFIG_FILENAME)
    scenario = ScenarioConfig(
        network_path=NETWORK_FILENAME,
        route_path=ROUTES_FILENAME,
        begin=0,
        end=window_seconds,
        step_length=manifest.step_length,
        vehroute_output=VEHROUTE_FILENAME if manifest.vehroute_output else None,
    )
    with open(config_path, "w", encoding="utf-8") as f:
        f.write(emit_sumocfg(scenario))
    manifest_path = os.path.join(out_dir, MANIFEST_FILENAME)
    with open(manifest_path, "w", encoding="utf-8") as f:
        f.write(manifest.to_json())

    return BuildArtifacts(
        network_path=net_path,
        routes_path=routes_path,
        config_path=config_path,
        manifest_path=manifest_path,
        diagnostics=diagnostics,
    )


def _reports_against_flows(
    flows, vehicle_ids: list[str]
) -> list[ComparisonReport]:
    real_by_intersection = real_bins_from_flows(flows)
    reports = []
    for iid in sorted(real_by_intersection):
        real_bins = real_by_intersection[iid]
        sim = reconstruct_counts(vehicle_ids, len(real_bins), intersection_id=iid)
        reports.append(compare(real_bins, sim))
    return reports


def validate_offline(routes_path: str, vehroutes_path: str) -> list[ComparisonReport]:
    """Compare counts encoded in the route file against a vehroute output."""
    with open(routes_path, encoding="utf-8") as f:
        flows, _ = parse_routes_xml(f.read())
    if not flows:
        raise PipelineError("route file contains no flows to validate")
    with open(vehroutes_path, encoding="utf-8") as f:
        parsed = parse_vehroutes(f.read())
    vehicle_ids = [v.vehicle_id for v in parsed.vehicles]
    return _reports_against_flows(flows, vehicle_ids)


def validate_traci(
    routes_path: str, host: str, port: int, steps: int | None = None
) -> list[ComparisonReport]:
    """Drive a live simulation over TraCI and compare collected counts."""
    from .traci_client import traci_collect

    with open(routes_path, encoding="utf-8") as f:
        flows, _ = parse_routes_xml(f.read())
    if not flows:
        raise PipelineError("route file contains no flows to validate")
    edges = sorted({f.from_edge for f in flows} | {f.to_edge for f in flows})
    if steps is None:
        steps = max(f.end for f in flows)
    per_edge = traci_collect(host, port, edges, steps)
    vehicle_ids = sorted(set().union(*per_edge.values())) if per_edge else []
    return _reports_against_flows(flows, vehicle_ids)
