"""HTTP/JSON configuration and monitoring API plus the live WebSocket feed.

Handlers never touch engine state directly: everything goes through the
runtime's snapshot/apply mailbox, applied at tick boundaries.  A failed
PUT or POST leaves both the engine and the on-disk files exactly as they
were.  The built web UI, when present, is served from ``/``.
"""

from __future__ import annotations

import re
import tempfile
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, UploadFile, WebSocket, WebSocketDisconnect
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import __version__
from .core import ConfigError, config_json_schema, config_to_dict, validate_config
from .mdrnn.weights import load_weights
from .netio import FEED_SCHEMA_VERSION
from .runtime import EngineRuntime
from .weightfile import WeightFileError

_SESSION_NAME = re.compile(r"^[\w.-]+\.csv$")


class RoutingCounters(BaseModel):
    matched: int
    passed: int
    dropped: int


class InteractionStatus(BaseModel):
    mode: str
    switchover_s: float


class StatusResponse(BaseModel):
    state: str
    lead: str
    dimension: int
    model_file: str
    model_name: str
    uptime_s: float
    pending_events: int
    logging_disabled: bool
    interaction: InteractionStatus
    counters: dict[str, int]
    last_1s: dict[str, int]
    routing: RoutingCounters


class ApplyResponse(BaseModel):
    applied: bool


class LogFileInfo(BaseModel):
    session: str
    size_bytes: int


class ModelUploadResponse(BaseModel):
    model_name: str
    dimension: int


def _violations(status_code: int, violations: list[str]) -> JSONResponse:
    return JSONResponse(status_code=status_code, content={"violations": violations})


def create_app(runtime: EngineRuntime, static_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="impsy", version=__version__)

    @app.get("/api/status", response_model=StatusResponse)
    def status() -> StatusResponse:
        snap = runtime.snapshot()
        return StatusResponse(**snap)

    @app.get("/api/config")
    def get_config() -> JSONResponse:
        return JSONResponse(config_to_dict(runtime.config))

    @app.put("/api/config")
    def put_config(payload: dict):
        try:
            config = validate_config(payload, base_dir=runtime.base_dir)
        except ConfigError as exc:
            return _violations(422, exc.violations)

        params = None
        model_name = None
        model_path = runtime._resolve(config.model_file)
        needs_reload = (
            config.model_file != runtime.config.model_file
            or config.dimension != runtime.config.dimension
        )
        if needs_reload:
            if not model_path.exists():
                return _violations(409, [f"model file not found: {model_path}"])
            try:
                params = load_weights(model_path)
            except WeightFileError as exc:
                return _violations(422, [str(exc)])
            model_name = model_path.name
        try:
            runtime.apply_config(config, params=params, model_name=model_name)
        except (ValueError, TimeoutError) as exc:
            return _violations(422, [str(exc)])
        return ApplyResponse(applied=True)

    @app.get("/api/logs", response_model=list[LogFileInfo])
    def list_logs() -> list[LogFileInfo]:
        log_dir = runtime._resolve(runtime.config.log_dir)
        if not log_dir.is_dir():
            return []
        return [
            LogFileInfo(session=p.name, size_bytes=p.stat().st_size)
            for p in sorted(log_dir.glob("*.csv"))
        ]

    @app.get("/api/logs/{session}")
    def get_log(session: str):
        if not _SESSION_NAME.match(session):
            return _violations(404, [f"unknown session: {session}"])
        path = runtime._resolve(runtime.config.log_dir) / session
        if not path.is_file():
            return _violations(404, [f"unknown session: {session}"])
        return FileResponse(path, media_type="text/csv", filename=session)

    @app.post("/api/model")
    def upload_model(file: UploadFile):
        blob = file.file.read()
        # validate in a scratch location so a bad upload never touches
        # the model directory
        with tempfile.NamedTemporaryFile(suffix=".mdrn", delete=False) as tmp:
            tmp.write(blob)
            tmp_path = Path(tmp.name)
        try:
            try:
                params = load_weights(tmp_path)
            except WeightFileError as exc:
                return _violations(422, [str(exc)])
            if params.D != runtime.config.dimension:
                return _violations(422, [
                    f"dimension mismatch: model has dimension {params.D},"
                    f" engine runs dimension {runtime.config.dimension}"
                ])
        finally:
            tmp_path.unlink(missing_ok=True)

        name = Path(file.filename or "uploaded.mdrn").name
        if not name.endswith(".mdrn"):
            name += ".mdrn"
        try:
            runtime.apply_model(params, name)
        except (ValueError, TimeoutError) as exc:
            return _violations(422, [str(exc)])
        # the engine accepted the swap; only now touch the model directory
        model_dir = runtime._resolve(runtime.config.model_file).parent
        model_dir.mkdir(parents=True, exist_ok=True)
        (model_dir / name).write_bytes(blob)
        return ModelUploadResponse(model_name=name, dimension=params.D)

    @app.get("/api/schema")
    def schemas() -> dict:
        return {
            "version": 1,
            "config": config_json_schema(),
            "status": StatusResponse.model_json_schema(),
            "frame_feed": {
                "version": FEED_SCHEMA_VERSION,
                "type": "object",
                "description": "one JSON object per frame on /ws; clients must "
                               "tolerate unknown fields",
                "properties": {
                    "v": {"type": "integer"},
                    "t": {"type": "number"},
                    "source": {"enum": ["human", "ai"]},
                    "values": {"type": "array", "items": {"type": "number"}},
                    "dt": {"type": "number"},
                    "lead": {"enum": ["human", "ai"]},
                },
            },
        }

    @app.websocket("/ws")
    async def frame_feed(ws: WebSocket):
        await ws.accept()
        q = runtime.ws_hub.register()
        try:
            while True:
                item = await q.get()
                if item is None:  # hub marked us too slow
                    break
                await ws.send_text(item)
        except WebSocketDisconnect:
            pass
        finally:
            runtime.ws_hub.unregister(q)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
