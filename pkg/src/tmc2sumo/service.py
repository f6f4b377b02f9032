"""HTTP facade over the pipeline for the companion UI.

Every endpoint wraps the same pipeline functions the CLI uses; builds run on
a background worker and scenario records persist to a directory store. The
compiled UI, when present, is served as static assets from the same origin.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from . import pipeline
from .errors import ManifestError, PipelineError, ToleranceExceeded, TransportError
from .manifest import PipelineManifest
from .report import render_comparison_chart
from .store import (
    BUILT,
    DRAFT,
    FAILED,
    BuildInProgressError,
    ScenarioStore,
    UnknownScenarioError,
)
from .tmcdata import available_time_range
from .transport import HttpFetcher, ProcessRunner
from .validation import parse_vehroutes, report_to_csv, report_to_json

ARTIFACT_KINDS = {
    "network": (pipeline.NETWORK_FILENAME, "application/xml"),
    "routes": (pipeline.ROUTES_FILENAME, "application/xml"),
    "config": (pipeline.CONFIG_FILENAME, "application/xml"),
    "manifest": (pipeline.MANIFEST_FILENAME, "application/json"),
    "report": ("report.json", "application/json"),
    "report-csv": ("report.csv", "text/csv"),
    "report-chart": ("report.png", "image/png"),
}


@dataclass
class ServiceConfig:
    store_dir: str
    data_path: str | None = None
    schema_path: str | None = None
    static_dir: str | None = None
    http: HttpFetcher | None = None
    runner: ProcessRunner | None = None
    synchronous_builds: bool = False


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="tmc2sumo service")
    store = ScenarioStore(config.store_dir)
    executor = ThreadPoolExecutor(max_workers=4)
    app.state.store = store

    @app.exception_handler(PipelineError)
    async def pipeline_error_handler(_req: Request, exc: PipelineError):
        status = 400
        if isinstance(exc, UnknownScenarioError):
            status = 404
        elif isinstance(exc, BuildInProgressError):
            status = 409
        elif isinstance(exc, TransportError):
            status = 502
        return JSONResponse(
            status_code=status,
            content={"error": str(exc), "category": exc.category},
        )

    def _manifest_from_body(body: dict) -> PipelineManifest:
        if not isinstance(body, dict):
            raise ManifestError("manifest body must be a JSON object")
        return PipelineManifest.from_dict(body)

    @app.post("/scenarios", status_code=201)
    async def create_scenario(body: dict):
        manifest = _manifest_from_body(body)
        record = store.create(manifest)
        return record.to_dict()

    @app.get("/scenarios/{scenario_id}")
    async def get_scenario(scenario_id: str):
        record = store.get(scenario_id)
        payload = record.to_dict()
        payload["building"] = store.is_building(scenario_id)
        return payload

    def _run_build(scenario_id: str) -> None:
        record = store.get(scenario_id)
        try:
            manifest = PipelineManifest.from_dict(record.manifest)
            out_dir = store.scenario_dir(scenario_id)
            artifacts = pipeline.build_scenario(
                manifest, out_dir, http=config.http, runner=config.runner
            )
            record.status = BUILT
            record.artifacts = {
                kind: os.path.basename(path)
                for kind, path in artifacts.as_dict().items()
            }
            record.diagnostics = artifacts.diagnostics
        except ToleranceExceeded as exc:
            record.status = FAILED
            record.diagnostics = [
                str(exc),
                "re-submit with allow_distance_m set to accept this match",
            ]
        except Exception as exc:  # build worker must never die silently
            record.status = FAILED
            category = getattr(exc, "category", "error")
            record.diagnostics = [f"{category}: {exc}"]
        finally:
            store.end_build(scenario_id)
            store.update(record)

    @app.post("/scenarios/{scenario_id}/build", status_code=202)
    async def build_scenario(scenario_id: str):
        store.begin_build(scenario_id)
        record = store.get(scenario_id)
        record.status = DRAFT
        record.artifacts = {}
        record.diagnostics = []
        store.update(record)
        if config.synchronous_builds:
            _run_build(scenario_id)
        else:
            executor.submit(_run_build, scenario_id)
        return {"scenario_id": scenario_id, "status": "building"}

    @app.get("/intersections/timerange")
    async def timerange(ids: str, data: str | None = None):
        id_list = [i.strip() for i in ids.split(",") if i.strip()]
        if not id_list:
            raise ManifestError("ids query parameter is empty")
        data_path = data or config.data_path
        manifest_raw = {
            "intersection_ids": id_list,
            # Dummy window; only the data source matters for a range query.
            "window": {"start": "2000-01-01T00:00:00", "end": "2000-01-01T01:00:00"},
            "data": {"path": data_path} if data_path else {"auto_fetch": True},
            "network": {"path": "unused"},
            "schema": config.schema_path,
        }
        manifest = PipelineManifest.from_dict(manifest_raw)
        dataset = pipeline.load_dataset(manifest, http=config.http)
        ranges = available_time_range(dataset, id_list)
        return {
            iid: [[start.isoformat(), end.isoformat()] for start, end in spans]
            for iid, spans in ranges.items()
        }

    @app.get("/scenarios/{scenario_id}/artifacts/{kind}")
    async def get_artifact(scenario_id: str, kind: str):
        record = store.get(scenario_id)
        if kind not in ARTIFACT_KINDS:
            raise HTTPException(status_code=404, detail=f"unknown artifact kind {kind!r}")
        filename, content_type = ARTIFACT_KINDS[kind]
        path = os.path.join(store.scenario_dir(record.scenario_id), filename)
        if not os.path.isfile(path):
            raise HTTPException(status_code=404, detail=f"artifact {kind!r} not built yet")
        return FileResponse(path, media_type=content_type, filename=filename)

    @app.post("/scenarios/{scenario_id}/files/{kind}")
    async def upload_file(scenario_id: str, kind: str, request: Request):
        """Store an uploaded network or data file and point the manifest at it."""
        if kind not in ("network", "data"):
            raise HTTPException(status_code=404, detail=f"cannot upload kind {kind!r}")
        record = store.get(scenario_id)
        body = await request.body()
        suffix = "net.xml" if kind == "network" else "counts.csv"
        path = os.path.join(store.scenario_dir(scenario_id), f"uploaded.{suffix}")
        with open(path, "wb") as f:
            f.write(body)
        record.manifest[kind] = {"path": path, "auto_fetch": False}
        store.update(record)
        return {"stored": path}

    @app.post("/scenarios/{scenario_id}/validate")
    async def validate_scenario(scenario_id: str, request: Request):
        record = store.get(scenario_id)
        if record.status != BUILT:
            raise HTTPException(status_code=409, detail="scenario is not built")
        scenario_dir = store.scenario_dir(scenario_id)
        routes_path = os.path.join(scenario_dir, pipeline.ROUTES_FILENAME)

        content_type = request.headers.get("content-type", "")
        if content_type.startswith("application/json"):
            body = await request.json()
            traci = body.get("traci") or {}
            host = traci.get("host")
            port = traci.get("port")
            if not host or not port:
                raise ManifestError("JSON validation body needs traci.host and traci.port")
            reports = pipeline.validate_traci(
                routes_path, host, int(port), steps=traci.get("steps")
            )
        else:
            raw = await request.body()
            if not raw:
                raise ManifestError("upload a vehroute XML body or a JSON traci endpoint")
            text = raw.decode("utf-8")
            parse_vehroutes(text)  # surface malformed uploads as 400 before writing
            vehroutes_path = os.path.join(scenario_dir, pipeline.VEHROUTE_FILENAME)
            with open(vehroutes_path, "w", encoding="utf-8") as f:
                f.write(text)
            reports = pipeline.validate_offline(routes_path, vehroutes_path)

        with open(os.path.join(scenario_dir, "report.json"), "w", encoding="utf-8") as f:
            f.write(report_to_json(reports))
        with open(os.path.join(scenario_dir, "report.csv"), "w", encoding="utf-8") as f:
            f.write(report_to_csv(reports))
        render_comparison_chart(reports, os.path.join(scenario_dir, "report.png"))
        return Response(content=report_to_json(reports), media_type="application/json")

    if config.static_dir and os.path.isdir(config.static_dir):
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app


def main() -> None:
    """Entry point for running the service directly."""
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(description="Run the tmc2sumo HTTP service")
    parser.add_argument("--store", default="scenario-store", help="scenario store directory")
    parser.add_argument("--data", default=None, help="default counts CSV for timerange queries")
    parser.add_argument("--static", default=None, help="directory of compiled UI assets")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    args = parser.parse_args()

    app = create_app(
        ServiceConfig(store_dir=args.store, data_path=args.data, static_dir=args.static)
    )
    uvicorn.run(app, host=args.host, port=args.port)


if __name__ == "__main__":
    main()
