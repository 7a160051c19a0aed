"""REST front door for the commissioning control plane.

Wraps the engine and catalogs in a single service facade, adds KPI
collection, a sequence-numbered event stream for live UIs, and simulated
per-node usage sampling, and exposes all of it over JSON HTTP.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .bcr_agents import BcrController
from .catalogs import (
    CatalogConflictError,
    DeploymentCatalog,
    DeploymentRecord,
    EventLogEntry,
    ResourceCatalog,
    UnknownDeploymentError,
)
from .clock import Clock, MonotonicClock
from .deployment_engine import TRACES_DIRNAME, DeploymentEngine, KpiTimeline
from .lifecycle import InvalidTransitionError, LifecycleState
from .placement import OrderValidationError, ServiceOrder, parse_service_order
from .substrate import Node, Topology, UnknownNodeError

logger = logging.getLogger(__name__)

DEFAULT_PORT = 8080
DEFAULT_SAMPLE_INTERVAL_S = 1.0


class ServiceError(Exception):
    """Base class for service-level request failures."""


class DeploymentStateConflictError(ServiceError):
    """Requested operation conflicts with the deployment's state."""


@dataclass(frozen=True)
class KpiReport:
    """Commissioning time report for one completed deployment."""

    deployment_id: str
    deployment_duration_ms: float
    timeline: KpiTimeline
    per_step_durations_ms: dict

    def to_dict(self) -> dict:
        return {
            "deploymentId": self.deployment_id,
            "deploymentDurationMs": self.deployment_duration_ms,
            "timeline": self.timeline.to_dict(),
            "perStepDurationsMs": dict(self.per_step_durations_ms),
        }


def build_kpi_report(
    record: DeploymentRecord, t_ztc_deploy_start: float, t_ztc_running: float
) -> KpiReport:
    """Derive the report from the record's event log.

    Step durations are gaps between consecutive events; the lead-in gap
    between order acceptance and the first event is booked as "accepted",
    so the per-step durations telescope exactly to the total.
    """
    t_ran_running = record.event_timestamp("running")
    if t_ran_running is None:
        raise ValueError(f"{record.deployment_id} never reached running")
    events = record.event_log[: [e.step for e in record.event_log].index("running") + 1]
    per_step: dict[str, float] = {}
    previous_ts = record.created_at
    previous_step = "accepted"
    for entry in events:
        per_step[previous_step] = (
            per_step.get(previous_step, 0.0) + (entry.timestamp - previous_ts) * 1000.0
        )
        previous_ts = entry.timestamp
        previous_step = entry.step
    return KpiReport(
        deployment_id=record.deployment_id,
        deployment_duration_ms=(t_ran_running - record.created_at) * 1000.0,
        timeline=KpiTimeline(
            t_ztc_deploy_start=t_ztc_deploy_start,
            t_ztc_running=t_ztc_running,
            t_ran_deploy_start=record.created_at,
            t_ran_running=t_ran_running,
        ),
        per_step_durations_ms=per_step,
    )


@dataclass(frozen=True)
class UsageSample:
    """Substrate resource counters of one node at one instant."""

    node_id: str
    timestamp: float
    cpu_used_millicores: int
    ram_used_mb: int

    def to_dict(self) -> dict:
        return {
            "nodeId": self.node_id,
            "timestamp": self.timestamp,
            "cpuUsedMillicores": self.cpu_used_millicores,
            "ramUsedMb": self.ram_used_mb,
        }


@dataclass(frozen=True)
class EventStreamEntry:
    seq: int
    deployment_id: str
    timestamp: float
    step: str
    detail: str | None

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "deploymentId": self.deployment_id,
            "timestamp": self.timestamp,
            "step": self.step,
            "detail": self.detail,
        }


def node_view(node: Node) -> dict:
    return {
        "nodeId": node.id,
        "tier": node.tier.value,
        "position": node.position.to_dict(),
        "cpuCapacityMillicores": node.cpu_capacity_millicores,
        "cpuUsedMillicores": node.cpu_used_millicores,
        "ramCapacityMb": node.ram_capacity_mb,
        "ramUsedMb": node.ram_used_mb,
        "diskCapacityMb": node.disk_capacity_mb,
        "diskUsedMb": node.disk_used_mb,
        "antennas": [
            {
                "serial": antenna.serial,
                "position": antenna.position.to_dict(),
                "occupiedBy": antenna.occupied_by,
            }
            for antenna in node.antennas
        ],
    }


class ZtcService:
    """Facade over topology, catalogs, controller and engine.

    Owns the artifacts the REST layer serves: the global event stream,
    KPI reports (kept after deployment deletion), and usage samples.
    """

    def __init__(
        self,
        topology: Topology,
        clock: Clock | None = None,
        data_dir: Path | None = None,
        enforce_tiers: bool = True,
        sample_interval_s: float = DEFAULT_SAMPLE_INTERVAL_S,
        unit_start_delay_s: float = 0.0,
    ):
        self.clock = clock if clock is not None else MonotonicClock()
        self.topology = topology
        self.data_dir = Path(data_dir) if data_dir is not None else None
        self.sample_interval_s = sample_interval_s
        self._t_ztc_deploy_start = self.clock.now()

        self.resource_catalog = ResourceCatalog(self.clock, self.data_dir)
        self.deployment_catalog = DeploymentCatalog(self.data_dir)
        trace_dir = self.data_dir / TRACES_DIRNAME if self.data_dir is not None else None
        self.controller = BcrController(self.clock, trace_dir)
        self.engine = DeploymentEngine(
            topology=topology,
            clock=self.clock,
            resource_catalog=self.resource_catalog,
            deployment_catalog=self.deployment_catalog,
            controller=self.controller,
            data_dir=self.data_dir,
            enforce_tiers=enforce_tiers,
            event_sink=self._on_event,
            unit_start_delay_s=unit_start_delay_s,
        )
        self.resource_catalog.refresh(topology)

        self._events: list[EventStreamEntry] = []
        self._kpis: dict[str, KpiReport] = {}
        self._usage: list[UsageSample] = []
        self._lock = threading.Lock()
        self._sampler: threading.Thread | None = None
        self._sampler_stop = threading.Event()
        self._t_ztc_running = self.clock.now()

    @property
    def t_ztc_deploy_start(self) -> float:
        return self._t_ztc_deploy_start

    @property
    def t_ztc_running(self) -> float:
        return self._t_ztc_running

    def _on_event(self, deployment_id: str, entry: EventLogEntry) -> None:
        with self._lock:
            self._events.append(
                EventStreamEntry(
                    seq=len(self._events) + 1,
                    deployment_id=deployment_id,
                    timestamp=entry.timestamp,
                    step=entry.step,
                    detail=entry.detail,
                )
            )

    def submit_order(
        self, order: ServiceOrder | dict, sync: bool = True
    ) -> DeploymentRecord:
        """Admit and run an order; with sync=False the pipeline runs on a
        worker thread and the Pending record is returned immediately."""
        if isinstance(order, dict):
            order = parse_service_order(order)
        record = self.engine.accept_order(order)
        if sync:
            self.engine.run(record)
            self._finish(record)
        else:
            worker = threading.Thread(
                target=self._run_async, args=(record,), name=f"pipeline-{record.deployment_id}"
            )
            worker.daemon = True
            worker.start()
        return record

    def _run_async(self, record: DeploymentRecord) -> None:
        try:
            self.engine.run(record)
        finally:
            self._finish(record)

    def _finish(self, record: DeploymentRecord) -> None:
        if record.lifecycle is LifecycleState.RUNNING:
            report = build_kpi_report(record, self._t_ztc_deploy_start, self._t_ztc_running)
            with self._lock:
                self._kpis[record.deployment_id] = report

    def delete_deployment(self, deployment_id: str) -> DeploymentRecord:
        """Tear down a Running deployment (freeing its resources), then
        purge the record. Aborted records purge directly."""
        record = self.deployment_catalog.get(deployment_id)
        if record.lifecycle is LifecycleState.RUNNING:
            self.engine.teardown(deployment_id)
        elif not record.lifecycle.is_terminal:
            raise DeploymentStateConflictError(
                f"{deployment_id} is mid-pipeline ({record.lifecycle.value}); retry later"
            )
        self.deployment_catalog.delete(deployment_id)
        return record

    def deployment(self, deployment_id: str) -> DeploymentRecord:
        return self.deployment_catalog.get(deployment_id)

    def deployments(
        self, tag: str | None = None, state: LifecycleState | None = None
    ) -> list[DeploymentRecord]:
        return self.deployment_catalog.list(tag=tag, state=state)

    def kpi(self, deployment_id: str) -> KpiReport | None:
        with self._lock:
            return self._kpis.get(deployment_id)

    def sample_usage(self) -> list[UsageSample]:
        timestamp = self.clock.now()
        samples = [
            UsageSample(
                node_id=node.id,
                timestamp=timestamp,
                cpu_used_millicores=node.cpu_used_millicores,
                ram_used_mb=node.ram_used_mb,
            )
            for _, node in sorted(self.topology.nodes.items())
        ]
        with self._lock:
            self._usage.extend(samples)
        return samples

    def metrics(self) -> dict:
        with self._lock:
            kpis = [report.to_dict() for report in self._kpis.values()]
            usage = [sample.to_dict() for sample in self._usage]
        return {"kpis": kpis, "usage": usage}

    def events_since(self, since: int) -> list[EventStreamEntry]:
        if since < 0:
            raise ValueError("since must be >= 0")
        with self._lock:
            return [e for e in self._events if e.seq > since]

    def latest_seq(self) -> int:
        with self._lock:
            return len(self._events)

    def start_sampler(self) -> None:
        """Wall-clock background sampler; tests call sample_usage directly."""
        if self._sampler is not None:
            return
        self._sampler_stop.clear()

        def loop() -> None:
            while not self._sampler_stop.wait(self.sample_interval_s):
                self.sample_usage()

        self._sampler = threading.Thread(target=loop, name="usage-sampler", daemon=True)
        self._sampler.start()

    def stop_sampler(self) -> None:
        if self._sampler is None:
            return
        self._sampler_stop.set()
        self._sampler.join()
        self._sampler = None


def _error_response(status: int, exc: Exception) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": str(exc)})


def create_app(service: ZtcService) -> FastAPI:
    app = FastAPI(title="ztc", docs_url=None, redoc_url=None)
    # The management UI is served from a different origin during development.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(OrderValidationError)
    async def _order_error(_request: Request, exc: OrderValidationError) -> JSONResponse:
        return _error_response(400, exc)

    @app.exception_handler(UnknownDeploymentError)
    async def _unknown_deployment(_request: Request, exc: UnknownDeploymentError) -> JSONResponse:
        return _error_response(404, exc)

    @app.exception_handler(UnknownNodeError)
    async def _unknown_node(_request: Request, exc: UnknownNodeError) -> JSONResponse:
        return _error_response(404, exc)

    @app.exception_handler(DeploymentStateConflictError)
    async def _state_conflict(
        _request: Request, exc: DeploymentStateConflictError
    ) -> JSONResponse:
        return _error_response(409, exc)

    @app.exception_handler(InvalidTransitionError)
    async def _transition_conflict(_request: Request, exc: InvalidTransitionError) -> JSONResponse:
        return _error_response(409, exc)

    @app.exception_handler(CatalogConflictError)
    async def _catalog_conflict(_request: Request, exc: CatalogConflictError) -> JSONResponse:
        return _error_response(409, exc)

    @app.post("/api/orders")
    async def post_order(request: Request, sync: bool = False) -> JSONResponse:
        try:
            doc = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _error_response(400, exc)
        if not isinstance(doc, dict):
            return JSONResponse(status_code=400, content={"error": "order must be an object"})
        order = parse_service_order(doc)
        record = service.submit_order(order, sync=sync)
        if sync and record.lifecycle is LifecycleState.ABORTED:
            return JSONResponse(
                status_code=409,
                content={"reason": record.abort_reason, "deploymentId": record.deployment_id},
            )
        return JSONResponse(
            status_code=202,
            content={"deploymentId": record.deployment_id, "lifecycle": record.lifecycle.value},
        )

    @app.get("/api/deployments")
    def list_deployments(tag: str | None = None, state: str | None = None):
        lifecycle = None
        if state is not None:
            try:
                lifecycle = LifecycleState(state)
            except ValueError as exc:
                return _error_response(400, exc)
        records = service.deployments(tag=tag, state=lifecycle)
        return {"deployments": [r.to_dict() for r in records]}

    @app.get("/api/deployments/{deployment_id}")
    def get_deployment(deployment_id: str):
        record = service.deployment(deployment_id)
        report = service.kpi(deployment_id)
        doc = record.to_dict()
        doc["kpi"] = report.to_dict() if report is not None else None
        return doc

    @app.delete("/api/deployments/{deployment_id}")
    def delete_deployment(deployment_id: str):
        record = service.delete_deployment(deployment_id)
        return {"deploymentId": record.deployment_id, "lifecycle": record.lifecycle.value}

    @app.get("/api/nodes")
    def list_nodes():
        nodes = [node_view(node) for _, node in sorted(service.topology.nodes.items())]
        return {"nodes": nodes}

    @app.get("/api/nodes/{node_id}")
    def get_node(node_id: str):
        return node_view(service.topology.node(node_id))

    @app.get("/api/metrics")
    def get_metrics():
        return service.metrics()

    @app.get("/api/events")
    def get_events(since: int = 0):
        try:
            events = service.events_since(since)
        except ValueError as exc:
            return _error_response(400, exc)
        return {"events": [e.to_dict() for e in events], "latestSeq": service.latest_seq()}

    return app
