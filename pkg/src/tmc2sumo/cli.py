"""Command-line surface over the pipeline.

Subcommands: timerange, build, validate, fetch-map. A JSON manifest can
supply any input; flags fill the gaps, and on conflict the manifest wins.
No command touches the network or spawns processes unless its auto-fetch or
launch flag is set explicitly.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import pipeline
from .errors import (
    BoundingBoxError,
    ConversionError,
    ManifestError,
    NetworkParseError,
    PipelineError,
    ProjectionError,
    SchemaError,
    ToleranceExceeded,
    ToolMissingError,
    TransportError,
    VehrouteParseError,
    WindowAlignmentError,
    WindowDataError,
)
from .manifest import PipelineManifest
from .osmfetch import compute_bbox, convert_network, fetch_osm
from .report import render_comparison_chart
from .transport import RequestsFetcher, SubprocessRunner
from .validation import report_to_csv, report_to_json

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_NO_DATA = 3
EXIT_TRANSPORT = 4
EXIT_TOLERANCE = 5
EXIT_TOOL = 6
EXIT_PARSE = 7

_EXIT_BY_ERROR: list[tuple[type, int]] = [
    (ToleranceExceeded, EXIT_TOLERANCE),
    (WindowDataError, EXIT_NO_DATA),
    (WindowAlignmentError, EXIT_USAGE),
    (TransportError, EXIT_TRANSPORT),
    (ToolMissingError, EXIT_TOOL),
    (ConversionError, EXIT_TOOL),
    (NetworkParseError, EXIT_PARSE),
    (VehrouteParseError, EXIT_PARSE),
    (ProjectionError, EXIT_PARSE),
    (BoundingBoxError, EXIT_USAGE),
    (SchemaError, EXIT_USAGE),
    (ManifestError, EXIT_USAGE),
    (PipelineError, EXIT_UNEXPECTED),
]

_HINTS = {
    "tolerance": "re-run with --allow-distance <metres> to accept the match",
    "no-data": "run the timerange command to see what windows are available",
    "window-alignment": "align the window to the bin boundaries reported above",
    "schema": "check the schema mapping against the data file header",
    "manifest": "fix the manifest or flags and re-run",
    "tool-missing": "install the conversion tool or point the config at it",
}


def _exit_code_for(exc: PipelineError) -> int:
    for etype, code in _EXIT_BY_ERROR:
        if isinstance(exc, etype):
            return code
    return EXIT_UNEXPECTED


def _fail(exc: PipelineError) -> int:
    print(f"error [{exc.category}]: {exc}", file=sys.stderr)
    hint = _HINTS.get(exc.category)
    if hint:
        print(f"hint: {hint}", file=sys.stderr)
    return _exit_code_for(exc)


def _manifest_from_args(args: argparse.Namespace) -> PipelineManifest:
    """Merge CLI flags with the manifest file; manifest keys win."""
    flags: dict = {}
    if getattr(args, "ids", None):
        flags["intersection_ids"] = [i.strip() for i in args.ids.split(",") if i.strip()]
    if getattr(args, "window_start", None) and getattr(args, "window_end", None):
        flags["window"] = {"start": args.window_start, "end": args.window_end}
    network: dict = {}
    if getattr(args, "network", None):
        network["path"] = args.network
    if getattr(args, "auto_fetch_net", False):
        network["auto_fetch"] = True
    if network:
        flags["network"] = network
    data: dict = {}
    if getattr(args, "data", None):
        data["path"] = args.data
    if getattr(args, "auto_fetch_data", False):
        data["auto_fetch"] = True
    if data:
        flags["data"] = data
    if getattr(args, "tolerance", None) is not None:
        flags["tolerance_m"] = args.tolerance
    if getattr(args, "allow_distance", None) is not None:
        flags["allow_distance_m"] = args.allow_distance
    if getattr(args, "include_untyped", False):
        flags["include_untyped_edges"] = True
    if getattr(args, "buffer", None) is not None:
        flags["buffer_m"] = args.buffer
    if getattr(args, "schema", None):
        flags["schema"] = args.schema
    if getattr(args, "step_length", None) is not None:
        flags["step_length"] = args.step_length

    merged = flags
    if getattr(args, "manifest", None):
        with open(args.manifest, encoding="utf-8") as f:
            try:
                from_file = json.load(f)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"manifest is not valid JSON: {exc}") from exc
        merged = {**flags, **from_file}
    return PipelineManifest.from_dict(merged)


def _timerange_manifest(args: argparse.Namespace) -> PipelineManifest:
    # A range query has no window or network yet; give from_dict placeholders.
    if not (getattr(args, "window_start", None) and getattr(args, "window_end", None)):
        args.window_start = "2000-01-01T00:00:00"
        args.window_end = "2000-01-01T01:00:00"
    if not getattr(args, "network", None) and not getattr(args, "auto_fetch_net", False):
        args.network = "unused"
    return _manifest_from_args(args)


def cmd_timerange(args: argparse.Namespace) -> int:
    manifest = _timerange_manifest(args)
    http = RequestsFetcher() if manifest.auto_fetch_data else None
    ranges = pipeline.compute_timeranges(manifest, http=http)
    any_data = False
    print(f"{'intersection':>14}  {'from':>19}  {'to':>19}")
    for iid in manifest.intersection_ids:
        spans = ranges.get(str(iid), [])
        if not spans:
            print(f"{iid:>14}  {'-':>19}  {'-':>19}")
            continue
        any_data = True
        for start, end in spans:
            print(f"{iid:>14}  {start.isoformat():>19}  {end.isoformat():>19}")
    if not any_data:
        print("error [no-data]: none of the requested intersections have data", file=sys.stderr)
        return EXIT_NO_DATA
    return EXIT_OK


def cmd_build(args: argparse.Namespace) -> int:
    manifest = _manifest_from_args(args)
    http = RequestsFetcher() if (manifest.auto_fetch_data or manifest.auto_fetch_network) else None
    runner = SubprocessRunner() if manifest.auto_fetch_network else None
    artifacts = pipeline.build_scenario(manifest, args.out, http=http, runner=runner)
    for kind, path in artifacts.as_dict().items():
        print(f"{kind}: {path}")
    for diag in artifacts.diagnostics:
        print(f"diagnostic: {diag}")
    if args.launch:
        runner = SubprocessRunner()
        result = runner.run([args.simulator, "-c", artifacts.config_path])
        if result.returncode != 0:
            raise ConversionError(
                f"simulator exited {result.returncode}", stderr=result.stderr
            )
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    if bool(args.vehroutes) == bool(args.traci):
        raise ManifestError("pass exactly one of --vehroutes or --traci host:port")
    if args.vehroutes:
        reports = pipeline.validate_offline(args.routes, args.vehroutes)
    else:
        host, _, port = args.traci.partition(":")
        if not port:
            raise ManifestError("--traci must look like host:port")
        reports = pipeline.validate_traci(args.routes, host, int(port), steps=args.steps)

    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "report.csv")
    json_path = os.path.join(args.out, "report.json")
    chart_path = os.path.join(args.out, "report.png")
    with open(csv_path, "w", encoding="utf-8") as f:
        f.write(report_to_csv(reports))
    with open(json_path, "w", encoding="utf-8") as f:
        f.write(report_to_json(reports))
    render_comparison_chart(reports, chart_path)

    for report in reports:
        print(
            f"intersection {report.intersection_id}: real {report.real_total}, "
            f"simulated {report.simulated_total}, total abs diff {report.abs_diff_total}"
        )
    print(f"report: {csv_path}")
    print(f"report: {json_path}")
    print(f"chart: {chart_path}")
    return EXIT_OK


def cmd_fetch_map(args: argparse.Namespace) -> int:
    manifest = _timerange_manifest(args)
    http = RequestsFetcher()
    dataset = pipeline.load_dataset(
        manifest, http=http if manifest.auto_fetch_data else None
    )
    points = []
    for iid in manifest.intersection_ids:
        coord = dataset.coordinates.get(str(iid))
        if coord is None:
            raise ManifestError(f"no coordinates for intersection {iid} in the data")
        points.append(coord)
    bbox = compute_bbox(points, buffer=manifest.buffer_m)
    osm_text = fetch_osm(bbox, http)
    os.makedirs(args.out, exist_ok=True)
    osm_path = os.path.join(args.out, "extract.osm.xml")
    with open(osm_path, "w", encoding="utf-8") as f:
        f.write(osm_text)
    net_path = os.path.join(args.out, pipeline.NETWORK_FILENAME)
    convert_network(osm_path, net_path, SubprocessRunner())
    print(f"network: {net_path}")
    return EXIT_OK


def _add_common_inputs(parser: argparse.ArgumentParser, with_window: bool = True) -> None:
    parser.add_argument("--manifest", help="manifest JSON file (wins over flags)")
    parser.add_argument("--ids", help="comma-separated intersection ids")
    parser.add_argument("--data", help="counts CSV path")
    parser.add_argument("--auto-fetch-data", action="store_true",
                        help="fetch counts from the open-data portal")
    parser.add_argument("--schema", help="schema mapping JSON path")
    if with_window:
        parser.add_argument("--window-start", help="window start, ISO timestamp")
        parser.add_argument("--window-end", help="window end, ISO timestamp")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tmc2sumo",
        description="Compile turning-movement counts into simulator scenarios",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_range = sub.add_parser("timerange", help="show available data windows per intersection")
    _add_common_inputs(p_range, with_window=False)
    p_range.set_defaults(func=cmd_timerange)

    p_build = sub.add_parser("build", help="build scenario files from counts")
    _add_common_inputs(p_build)
    p_build.add_argument("--network", help="network XML path")
    p_build.add_argument("--auto-fetch-net", action="store_true",
                         help="fetch a map extract and convert it")
    p_build.add_argument("--out", default="scenario", help="output directory")
    p_build.add_argument("--tolerance", type=float, help="junction match tolerance, metres")
    p_build.add_argument("--allow-distance", type=float,
                         help="accept matches up to this distance, metres")
    p_build.add_argument("--include-untyped", action="store_true",
                         help="admit edges without type strings (hand-built networks)")
    p_build.add_argument("--buffer", type=float, help="map fetch buffer, metres")
    p_build.add_argument("--step-length", type=float, help="simulation step length, seconds")
    p_build.add_argument("--launch", action="store_true",
                         help="launch the simulator on the built scenario")
    p_build.add_argument("--simulator", default="sumo-gui",
                         help="simulator executable for --launch")
    p_build.set_defaults(func=cmd_build)

    p_val = sub.add_parser("validate", help="compare simulated counts against the inputs")
    p_val.add_argument("--routes", required=True, help="route file emitted by build")
    p_val.add_argument("--vehroutes", help="vehroute output XML from a simulation run")
    p_val.add_argument("--traci", help="live TraCI endpoint as host:port")
    p_val.add_argument("--steps", type=int, help="simulation steps to drive over TraCI")
    p_val.add_argument("--out", default="validation", help="report output directory")
    p_val.set_defaults(func=cmd_validate)

    p_map = sub.add_parser("fetch-map", help="download a map extract and convert it")
    _add_common_inputs(p_map, with_window=False)
    p_map.add_argument("--buffer", type=float, help="buffer around intersections, metres")
    p_map.add_argument("--out", default="map", help="output directory")
    p_map.set_defaults(func=cmd_fetch_map)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        return _fail(exc)
    except FileNotFoundError as exc:
        print(f"error [missing-file]: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
