"""tmc2sumo: turn intersection turning-movement counts into simulator scenarios.

The pipeline: parse a network file, bind each counted intersection to a
junction and classify its edges by travel direction, window the count data,
compile flows and vehicle types into route/config files, then validate a
simulation's vehicle counts against the inputs.
"""

from .demand import (
    CarFollowModel,
    FlowSpec,
    ScenarioConfig,
    VehicleTypeConfig,
    compile_flows,
    default_vehicle_types,
    emit_routes_xml,
    emit_sumocfg,
    encode_flow_id,
    movement_exit_direction,
    parse_vehicle_id,
)
from .errors import PipelineError, ToleranceExceeded
from .manifest import PipelineManifest
from .mapping import (
    Cardinal,
    EdgeFilterPolicy,
    EdgeMapping,
    IntersectionBinding,
    bind_intersection,
    classify_direction,
    find_nearest_junction,
    map_intersection_edges,
)
from .netmodel import (
    Edge,
    GeoProjection,
    Junction,
    RoadNetwork,
    bearing_degrees,
    lonlat_to_xy,
    parse_network,
    serialize_network,
)
from .osmfetch import BoundingBox, compute_bbox, convert_network, fetch_osm
from .report import render_comparison_chart
from .tmcdata import (
    CountBin,
    MovementKey,
    SchemaMapping,
    TmcDataset,
    Turn,
    VehicleClass,
    available_time_range,
    fetch_toronto_tmc,
    parse_tmc_csv,
    scale_counts,
    serialize_tmc_csv,
    slice_window,
)
from .traci_client import TraciClient, traci_collect
from .validation import (
    ComparisonReport,
    SimulatedCounts,
    compare,
    parse_routes_xml,
    parse_vehroutes,
    reconstruct_counts,
    report_to_csv,
    report_to_json,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
