"""Companion HTTP endpoints for the browser playground.

GET  /spec   -> current interface spec document
POST /log    -> append one interaction event to the session log (JSONL)
POST /query  -> apply one interaction, compile and execute it, return rows

The playground renders the widgets, a human explores, and the session log
becomes benchmark input. Appends are serialized per session.
"""

# no `from __future__ import annotations` here: FastAPI must evaluate the
# endpoint annotations, which live in closure scope

import json
import threading
from pathlib import Path

from .compiler import CompileOptions, compile_interaction
from .drivers import Driver, DriverConfig, open_driver
from .errors import DashbenchError
from .graph import InterfaceGraph, apply_data_manipulation, apply_interface_manipulation, build_graph
from .specs import InterfaceSpec, event_to_json_line, parse_interaction_log


class PlaygroundSession:
    """Server-side session state: the live graph, the append-only event
    log and the count of lines written."""

    def __init__(
        self,
        iface: InterfaceSpec,
        driver: Driver | None,
        log_path: str | Path | None,
        options: CompileOptions = CompileOptions(),
    ):
        self.graph: InterfaceGraph = build_graph(iface)
        self.driver = driver
        self.log_path = Path(log_path) if log_path else None
        self.options = options
        self.lines = 0
        self.last_ts: int | None = None
        self._lock = threading.Lock()
        if self.log_path is not None and self.log_path.exists():
            existing = [l for l in self.log_path.read_text(encoding="utf-8").splitlines() if l.strip()]
            self.lines = len(existing)

    def current_spec(self) -> dict:
        return self.graph.to_interface_spec().to_dict()

    def _validate(self, payload: dict):
        # Round-tripping through the log parser applies the full event
        # validation (coverage, operator kinds, manipulation shapes).
        line = json.dumps(payload)
        events = parse_interaction_log(line, self.graph.to_interface_spec())
        ev = events[0]
        if self.last_ts is not None and ev.timestamp < self.last_ts:
            ev = type(ev)(relationship=ev.relationship, timestamp=self.last_ts, parameters=ev.parameters)
        return ev

    def log_event(self, payload: dict) -> int:
        with self._lock:
            ev = self._validate(payload)
            if self.log_path is not None:
                with open(self.log_path, "a", encoding="utf-8") as fh:
                    fh.write(event_to_json_line(ev) + "\n")
            self.lines += 1
            self.last_ts = ev.timestamp
            return self.lines

    def run_query(self, payload: dict) -> dict:
        with self._lock:
            ev = self._validate(payload)
            if ev.is_manipulation:
                dirty = apply_interface_manipulation(self.graph, ev.relationship)
            else:
                dirty = apply_data_manipulation(self.graph, ev)
            batch = compile_interaction(self.graph, ev, dirty, self.options)
            self.last_ts = ev.timestamp
            out = {"timestamp": batch.timestamp, "queries": []}
            for q in batch.queries:
                entry: dict = {
                    "node": q.node,
                    "sql": q.sql,
                    "detail_level": q.detail_level,
                    "rows": [],
                    "columns": [],
                }
                if self.driver is not None:
                    columns, rows = self.driver.query(q.sql)
                    entry["columns"] = columns
                    entry["rows"] = [list(r) for r in rows]
                out["queries"].append(entry)
            return out


def create_app(
    iface: InterfaceSpec,
    driver_config: DriverConfig | None = None,
    log_path: str | Path | None = None,
    static_dir: str | Path | None = None,
    options: CompileOptions = CompileOptions(),
):
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse

    driver = open_driver(driver_config) if driver_config is not None else None
    session = PlaygroundSession(iface, driver, log_path, options)
    app = FastAPI(title="dashbench playground")
    app.state.session = session

    @app.exception_handler(DashbenchError)
    async def _domain_error(_request: Request, exc: DashbenchError):
        return JSONResponse(status_code=422, content={"error": str(exc)})

    @app.get("/spec")
    async def get_spec():
        return session.current_spec()

    @app.post("/log")
    async def post_log(request: Request):
        payload = await request.json()
        lines = session.log_event(payload)
        return {"lines": lines}

    @app.post("/query")
    async def post_query(request: Request):
        payload = await request.json()
        return session.run_query(payload)

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="playground")
    return app


def serve(
    iface: InterfaceSpec,
    driver_config: DriverConfig | None,
    host: str = "127.0.0.1",
    port: int = 8080,
    log_path: str | Path | None = None,
    static_dir: str | Path | None = None,
    options: CompileOptions = CompileOptions(),
) -> None:
    import uvicorn

    app = create_app(iface, driver_config, log_path=log_path, static_dir=static_dir, options=options)
    uvicorn.run(app, host=host, port=port, log_level="warning")
