"""HTTP run-control service.

Accepts load specs, computes their plans up front (so a client can show
frame counts and timing before starting anything), executes runs in
simulate/pcap/live mode, and reports the actual frames and elapsed time
back. Enforces the two operational rules: a spec carries exactly one
feature, and a port hosts at most one running run at a time.

Run records persist in an append-only JSON-lines journal, one full record
snapshot per state change, last line per run_id wins on reload. Records
that were running when the service died reload as failed with their
last-known frame count.
"""

from __future__ import annotations

import json
import os
import secrets
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, JSONResponse

from . import analyzer, wire
from .engine import make_plan
from .errors import (
    NetloadError,
    NotRunningError,
    PortBusyError,
    UnknownRunError,
    ValidationError,
)
from .serialize import (
    plan_to_json,
    report_to_json,
    spec_from_json,
    spec_to_json,
    verdict_to_json,
)

MODES = ("simulate", "pcap", "live")

# Loopback pacing rides on OS timers; the default acceptance band for live
# verdicts is environment-dependent and deliberately loose.
LIVE_TOLERANCE_RATIO = Fraction(5, 100)

_STATUS_BY_KIND = {
    "validation-error": 400,
    "invalid-frame-length": 400,
    "feature-conflict": 400,
    "empty-plan": 400,
    "unknown-run": 404,
    "port-busy": 409,
    "not-running": 409,
    "port-unavailable": 503,
    "send-failure": 500,
}


@dataclass
class ServiceConfig:
    listen: str = "127.0.0.1:8790"
    data_dir: str = "netload-data"
    token: str | None = None
    static_dir: str | None = None

    @property
    def host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen.rsplit(":", 1)[1])


def load_service_config(path: str | None = None) -> ServiceConfig:
    """Read the JSON config file, then apply environment overrides."""
    cfg = ServiceConfig()
    if path:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {path!r}: {exc}") from exc
        for key in ("listen", "data_dir", "token", "static_dir"):
            if key in raw:
                setattr(cfg, key, raw[key])
    for key, env in (
        ("listen", "NETLOAD_LISTEN"),
        ("data_dir", "NETLOAD_DATA_DIR"),
        ("token", "NETLOAD_TOKEN"),
        ("static_dir", "NETLOAD_STATIC_DIR"),
    ):
        if os.environ.get(env):
            setattr(cfg, key, os.environ[env])
    return cfg


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def _new_run_id() -> str:
    return f"{time.strftime('%Y%m%d-%H%M%S')}-{secrets.token_hex(4)}"


@dataclass
class _Runtime:
    """Transient, non-persisted attachments of a live run."""

    live: wire.LiveRun
    port: object
    port_id: str
    rate_key: str


class RunStore:
    """Run records plus the port-ownership registry; journal-backed."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        (self.data_dir / "captures").mkdir(exist_ok=True)
        self.journal_path = self.data_dir / "runs.jsonl"
        self._lock = threading.RLock()
        self._records: dict[str, dict] = {}
        self._order: list[str] = []
        self._runtimes: dict[str, _Runtime] = {}
        self._ports_in_use: dict[str, str] = {}
        self._load_journal()

    def _load_journal(self) -> None:
        if not self.journal_path.exists():
            return
        for line in self.journal_path.read_text().splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            run_id = record["run_id"]
            if run_id not in self._records:
                self._order.append(run_id)
            self._records[run_id] = record
        for record in self._records.values():
            if record["state"] == "running":
                record["state"] = "failed"
                record["error"] = "service restarted while the run was in progress"
                record["ended_at"] = _now_iso()
                self._append(record)

    def _append(self, record: dict) -> None:
        with open(self.journal_path, "a") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
            fh.flush()

    def capture_path(self, run_id: str) -> Path:
        return self.data_dir / "captures" / f"{run_id}.pcap"

    # -- record access --------------------------------------------------------

    def create(self, spec_obj: dict) -> dict:
        spec, _feature = spec_from_json(spec_obj)
        plan = make_plan(spec)
        record = {
            "run_id": _new_run_id(),
            "created_at": _now_iso(),
            "spec": spec_to_json(spec),
            "plan": plan_to_json(plan),
            "state": "planned",
            "mode": None,
            "frames_sent": 0,
            "started_at": None,
            "ended_at": None,
            "report": None,
            "verdict": None,
            "error": None,
            "capture_file": None,
        }
        with self._lock:
            self._records[record["run_id"]] = record
            self._order.append(record["run_id"])
            self._append(record)
        return self.snapshot(record["run_id"])

    def get(self, run_id: str) -> dict:
        with self._lock:
            if run_id not in self._records:
                raise UnknownRunError(f"no run {run_id!r}")
            return self._records[run_id]

    def snapshot(self, run_id: str) -> dict:
        """A consistent copy; live counters folded in for running runs."""
        with self._lock:
            record = dict(self.get(run_id))
            runtime = self._runtimes.get(run_id)
            if runtime and record["state"] == "running":
                record["frames_sent"] = runtime.live.frames_sent
                record["elapsed_so_far_ns"] = runtime.live.elapsed_ns
            return record

    def list_snapshots(self) -> list[dict]:
        with self._lock:
            return [self.snapshot(run_id) for run_id in self._order]

    # -- run lifecycle --------------------------------------------------------

    def start(self, run_id: str, mode: str) -> dict:
        if mode not in MODES:
            raise ValidationError(f"unknown mode {mode!r} (simulate, pcap or live)", field="mode")
        with self._lock:
            record = self.get(run_id)
            if record["state"] != "planned":
                raise ValidationError(
                    f"run {run_id} is {record['state']}, only planned runs start"
                )
            port_id = record["spec"]["port"]
            if port_id in self._ports_in_use:
                raise PortBusyError(
                    f"port {port_id!r} is owned by run {self._ports_in_use[port_id]}"
                )
            self._ports_in_use[port_id] = run_id
            record["state"] = "running"
            record["mode"] = mode
            record["started_at"] = _now_iso()
            self._append(record)

        try:
            spec, _ = spec_from_json(record["spec"])
            plan = make_plan(spec)
            if mode in ("simulate", "pcap"):
                trace = wire.execute(plan, spec.frame)
                report = analyzer.measure(trace.captured(), spec.rate)
                verdict = analyzer.verify(report, plan)
                if mode == "pcap":
                    with open(self.capture_path(run_id), "wb") as fh:
                        wire.write_pcap(trace, fh)
                with self._lock:
                    record["state"] = "completed"
                    record["frames_sent"] = plan.frames_total
                    record["ended_at"] = _now_iso()
                    record["report"] = report_to_json(report)
                    record["verdict"] = verdict_to_json(verdict)
                    if mode == "pcap":
                        record["capture_file"] = str(self.capture_path(run_id))
                    self._append(record)
            else:
                port = wire.open_port(port_id)
                runtime = _Runtime(
                    live=wire.transmit(plan, spec.frame, port),
                    port=port,
                    port_id=port_id,
                    rate_key=record["spec"]["line_rate"],
                )
                with self._lock:
                    self._runtimes[run_id] = runtime
                threading.Thread(
                    target=self._watch_live, args=(run_id,), daemon=True
                ).start()
        except NetloadError as exc:
            with self._lock:
                record["state"] = "failed"
                record["error"] = str(exc)
                record["ended_at"] = _now_iso()
                self._release_port(run_id)
                self._append(record)
            raise
        finally:
            if mode in ("simulate", "pcap"):
                with self._lock:
                    self._release_port(run_id)
        return self.snapshot(run_id)

    def stop(self, run_id: str) -> dict:
        with self._lock:
            record = self.get(run_id)
            runtime = self._runtimes.get(run_id)
            if record["state"] != "running" or runtime is None:
                raise NotRunningError(f"run {run_id} is {record['state']}")
        runtime.live.stop()
        runtime.live.join(timeout=5)
        self._finalize_live(run_id)
        return self.snapshot(run_id)

    def _watch_live(self, run_id: str) -> None:
        runtime = self._runtimes.get(run_id)
        if runtime is None:
            return
        runtime.live.join()
        self._finalize_live(run_id)

    def _finalize_live(self, run_id: str) -> None:
        # Idempotent: the stop path and the watcher thread may both arrive here.
        with self._lock:
            record = self._records.get(run_id)
            runtime = self._runtimes.get(run_id)
            if record is None or runtime is None or record["state"] != "running":
                return
            live = runtime.live
            record["frames_sent"] = live.frames_sent
            record["ended_at"] = _now_iso()
            record["actual_elapsed_ns"] = live.elapsed_ns
            if live.completed:
                record["state"] = "completed"
            elif live.error is not None:
                record["state"] = "failed"
                record["error"] = str(live.error)
            elif live.stop_requested:
                record["state"] = "stopped"
            else:
                record["state"] = "failed"
                record["error"] = "transmission aborted"
            if isinstance(runtime.port, wire.LoopbackPort) and runtime.port.records:
                from .frames import LineRate

                rate = LineRate.parse(runtime.rate_key)
                report = analyzer.measure(runtime.port.records, rate)
                record["report"] = report_to_json(report)
                if record["state"] == "completed":
                    plan = _plan_of(record)
                    tol = analyzer.Tolerance(
                        period_ns=plan.period_ns * LIVE_TOLERANCE_RATIO,
                        load=plan.achieved_load * LIVE_TOLERANCE_RATIO,
                    )
                    record["verdict"] = verdict_to_json(analyzer.verify(report, plan, tol))
            runtime.port.close()
            del self._runtimes[run_id]
            self._release_port(run_id)
            self._append(record)

    def _release_port(self, run_id: str) -> None:
        for port_id, owner in list(self._ports_in_use.items()):
            if owner == run_id:
                del self._ports_in_use[port_id]


def _plan_of(record: dict):
    spec, _ = spec_from_json(record["spec"])
    return make_plan(spec)


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="netload run control", version="0.1.0")
    app.state.config = config
    app.state.store = RunStore(config.data_dir)

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(NetloadError)
    async def _netload_error(_request: Request, exc: NetloadError):
        body = {"error": exc.kind, "message": str(exc)}
        if getattr(exc, "field", None):
            body["field"] = exc.field
        return JSONResponse(status_code=_STATUS_BY_KIND.get(exc.kind, 400), content=body)

    @app.middleware("http")
    async def _auth(request: Request, call_next):
        if config.token and request.url.path.startswith("/api") and request.method != "OPTIONS":
            if request.headers.get("x-auth-token") != config.token:
                return JSONResponse(status_code=401, content={"error": "unauthorized"})
        return await call_next(request)

    store: RunStore = app.state.store

    @app.get("/api/health")
    def health():
        return {"ok": True}

    @app.post("/api/runs", status_code=201)
    async def create_run(request: Request):
        try:
            payload = await request.json()
        except json.JSONDecodeError:
            raise ValidationError("request body is not valid JSON") from None
        return store.create(payload)

    @app.get("/api/runs")
    def list_runs():
        return store.list_snapshots()

    @app.get("/api/runs/{run_id}")
    def get_run(run_id: str):
        return store.snapshot(run_id)

    @app.post("/api/runs/{run_id}/start")
    def start_run(run_id: str, mode: str = "simulate"):
        return store.start(run_id, mode)

    @app.post("/api/runs/{run_id}/stop")
    def stop_run(run_id: str):
        return store.stop(run_id)

    @app.get("/api/runs/{run_id}/report")
    def get_report(run_id: str):
        record = store.snapshot(run_id)
        if record["report"] is None:
            raise UnknownRunError(f"run {run_id} has no report yet")
        return {"report": record["report"], "verdict": record["verdict"]}

    @app.get("/api/runs/{run_id}/capture")
    def get_capture(run_id: str):
        record = store.snapshot(run_id)
        path = record.get("capture_file")
        if not path or not Path(path).exists():
            raise UnknownRunError(f"run {run_id} has no capture file")
        return FileResponse(path, media_type="application/vnd.tcpdump.pcap",
                            filename=f"{run_id}.pcap")

    if config.static_dir and Path(config.static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="hmi")

    return app
