"""Zero-touch commissioning engine: order in, running RAN chain out.

Runs the whole pipeline synchronously: catalog refresh, discovery,
chain enumeration, validation, scoring, selection, manifest rendering,
unit creation (capacity reservation, address lease, antenna claim),
configuration push, affiliation and start. Any failure before Running
rolls back every acquired resource in reverse order and parks the
deployment in Aborted with the cause on record.
"""

from __future__ import annotations

import ipaddress
import logging
import threading
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Mapping

from .bcr_agents import BcrController
from .catalogs import (
    DeploymentCatalog,
    DeploymentRecord,
    EventLogEntry,
    ResourceCatalog,
    UnitRecord,
    UnitState,
    write_json_atomic,
)
from .clock import Clock
from .lifecycle import LifecycleState, check_transition
from .placement import (
    ChainCandidate,
    ServiceOrder,
    UnitKind,
    discover,
    enumerate_chains,
    score_chain,
    select_best,
    validate_chain,
)
from .substrate import ResourceDemand, Topology

logger = logging.getLogger(__name__)

MANIFESTS_DIRNAME = "manifests"
TRACES_DIRNAME = "traces"

#: Creation order; rollback and release run in reverse.
UNIT_CREATION_ORDER: tuple[UnitKind, ...] = (UnitKind.CU, UnitKind.DU, UnitKind.RU)


class EngineError(Exception):
    """Base class for deployment engine failures."""


class InfeasiblePlacementError(EngineError):
    """No candidate chain satisfies the order's constraints."""


class LeaseError(EngineError):
    """Address pool exhausted or lease bookkeeping violated."""


class IpPool:
    """Simulated DHCP scope; always hands out the lowest free address."""

    def __init__(self, network: str = "10.42.0.0/24", first_host: int = 2, last_host: int = 254):
        self._network = ipaddress.ip_network(network)
        if last_host < first_host:
            raise ValueError("empty address range")
        self._first_host = first_host
        self._last_host = last_host
        self._leases: dict[str, str] = {}
        self._lock = threading.Lock()

    def _address(self, host: int) -> str:
        return str(self._network.network_address + host)

    def lease(self, owner: str) -> str:
        with self._lock:
            for host in range(self._first_host, self._last_host + 1):
                address = self._address(host)
                if address not in self._leases:
                    self._leases[address] = owner
                    return address
        raise LeaseError("address pool exhausted")

    def release(self, address: str) -> None:
        with self._lock:
            if address not in self._leases:
                raise LeaseError(f"{address} is not leased")
            del self._leases[address]

    def owner(self, address: str) -> str | None:
        with self._lock:
            return self._leases.get(address)

    def leases(self) -> dict[str, str]:
        with self._lock:
            return dict(self._leases)


@dataclass(frozen=True)
class KpiTimeline:
    """The four commissioning timestamps: control-plane deploy start,
    control plane running, RAN deploy start, RAN running."""

    t_ztc_deploy_start: float | None = None
    t_ztc_running: float | None = None
    t_ran_deploy_start: float | None = None
    t_ran_running: float | None = None

    def __post_init__(self) -> None:
        present = [
            v
            for v in (
                self.t_ztc_deploy_start,
                self.t_ztc_running,
                self.t_ran_deploy_start,
                self.t_ran_running,
            )
            if v is not None
        ]
        if any(b <= a for a, b in zip(present, present[1:])):
            raise ValueError(f"timeline stamps must be strictly increasing: {present}")

    def to_dict(self) -> dict:
        return {
            "tZtcDeployStart": self.t_ztc_deploy_start,
            "tZtcRunning": self.t_ztc_running,
            "tRanDeployStart": self.t_ran_deploy_start,
            "tRanRunning": self.t_ran_running,
        }


IMAGE_NAMES = {
    UnitKind.CU: "oai-cu",
    UnitKind.DU: "oai-du",
    UnitKind.RU: "oai-ru",
}


@dataclass(frozen=True)
class Manifest:
    """Deployable description of one unit on one node."""

    deployment_id: str
    unit_kind: UnitKind
    node_id: str
    image_name: str
    demand: ResourceDemand
    params: dict

    def to_dict(self) -> dict:
        return {
            "deploymentId": self.deployment_id,
            "unitKind": self.unit_kind.value,
            "targetNodeId": self.node_id,
            "imageName": self.image_name,
            "resourceRequest": self.demand.to_dict(),
            "parameters": dict(self.params),
        }


def render_manifests(
    deployment_id: str, order: ServiceOrder, chain: ChainCandidate
) -> dict[UnitKind, Manifest]:
    node_ids = {
        UnitKind.CU: chain.cu_node_id,
        UnitKind.DU: chain.du_node_id,
        UnitKind.RU: chain.ru_node_id,
    }
    manifests = {}
    for kind in UNIT_CREATION_ORDER:
        params: dict = {
            "tag": order.tag,
            "maxUsers": order.max_users,
            "spectrumBand": order.spectrum_band,
        }
        if kind is UnitKind.RU:
            params["antennaSerial"] = chain.antenna_serial
        manifests[kind] = Manifest(
            deployment_id=deployment_id,
            unit_kind=kind,
            node_id=node_ids[kind],
            image_name=IMAGE_NAMES[kind],
            demand=order.constraints.demand(kind),
            params=params,
        )
    return manifests


def unit_config(manifest: Manifest) -> dict:
    """Runtime configuration pushed to a unit agent. The RU's antenna
    serial is rendered as the radio device address string."""
    config = dict(manifest.params)
    serial = config.pop("antennaSerial", None)
    if serial is not None:
        config["sdr_addrs"] = f"serial={serial}"
    return config


class DeploymentEngine:
    """Single-topology commissioning engine.

    ``step_hook(step, phase)`` is called around every pipeline step with
    phase ``"before"`` or ``"after"``; a hook that raises simulates a
    failure at exactly that point, which is how rollback behaviour is
    exercised.
    """

    def __init__(
        self,
        topology: Topology,
        clock: Clock,
        resource_catalog: ResourceCatalog,
        deployment_catalog: DeploymentCatalog,
        controller: BcrController,
        ip_pool: IpPool | None = None,
        data_dir: Path | None = None,
        enforce_tiers: bool = True,
        step_hook: Callable[[str, str], None] | None = None,
        event_sink: Callable[[str, "EventLogEntry"], None] | None = None,
        unit_start_delay_s: float = 0.0,
    ):
        self.topology = topology
        self.clock = clock
        self.resource_catalog = resource_catalog
        self.deployment_catalog = deployment_catalog
        self.controller = controller
        self.ip_pool = ip_pool if ip_pool is not None else IpPool()
        self.data_dir = Path(data_dir) if data_dir is not None else None
        self.enforce_tiers = enforce_tiers
        self.step_hook = step_hook
        self.event_sink = event_sink
        # Simulated container start latency; nonzero only in demo profiles.
        self.unit_start_delay_s = unit_start_delay_s
        # Serializes order pipelines; node-level reservations stay atomic
        # on their own, this keeps whole chains from interleaving.
        self._pipeline_lock = threading.Lock()

    def _log(self, record: DeploymentRecord, step: str, detail: str | None = None) -> None:
        entry = record.log_event(self.clock.now(), step, detail)
        if self.event_sink is not None:
            self.event_sink(record.deployment_id, entry)

    def _step(self, record: DeploymentRecord, step: str, phase: str = "before") -> None:
        if phase == "before":
            self._log(record, step)
        if self.step_hook is not None:
            self.step_hook(step, phase)

    def _transition(self, record: DeploymentRecord, target: LifecycleState) -> None:
        check_transition(record.lifecycle, target)
        record.lifecycle = target
        self.deployment_catalog.put(record)

    def accept_order(self, order: ServiceOrder) -> DeploymentRecord:
        """Admit an order: allocate an id and a Pending record."""
        record = DeploymentRecord(
            deployment_id=self.deployment_catalog.allocate_id(),
            tag=order.tag,
            order=order,
            created_at=self.clock.now(),
        )
        self.deployment_catalog.put(record)
        return record

    def run(self, record: DeploymentRecord) -> DeploymentRecord:
        """Drive an admitted order through the pipeline; never raises for
        placement or provisioning failures, those abort the record."""
        compensation: list[Callable[[], None]] = []
        with self._pipeline_lock:
            try:
                self._run_pipeline(record, record.order, compensation)
            except EngineError as exc:
                self._abort(record, compensation, str(exc))
            except Exception as exc:  # noqa: BLE001 - abort path records the cause
                self._abort(record, compensation, f"{type(exc).__name__}: {exc}")
        return record

    def submit_order(self, order: ServiceOrder) -> DeploymentRecord:
        return self.run(self.accept_order(order))

    def _run_pipeline(
        self,
        record: DeploymentRecord,
        order: ServiceOrder,
        compensation: list[Callable[[], None]],
    ) -> None:
        self._step(record, "refresh_catalog")
        entries = self.resource_catalog.refresh(self.topology)
        self._step(record, "refresh_catalog", "after")

        self._transition(record, LifecycleState.DISCOVERING)
        self._step(record, "discover")
        candidates = discover(order, entries, self.topology, enforce_tiers=self.enforce_tiers)
        self._step(record, "discover", "after")

        self._step(record, "enumerate_chains")
        chains = enumerate_chains(candidates)
        self._step(record, "enumerate_chains", "after")

        self._transition(record, LifecycleState.VALIDATING)
        self._step(record, "validate_chains")
        survivors = []
        for chain in chains:
            probe = validate_chain(chain, order, self.topology)
            if probe.passed:
                survivors.append((chain, probe))
        self._step(record, "validate_chains", "after")

        self._step(record, "score_chains")
        scored = [
            replace(chain, score=score_chain(chain, probe, order, self.topology))
            for chain, probe in survivors
        ]
        self._step(record, "score_chains", "after")

        self._step(record, "select_chain")
        best = select_best(scored)
        self._step(record, "select_chain", "after")
        if best is None:
            raise InfeasiblePlacementError(
                f"infeasible: no candidate chain satisfies order {order.tag!r} "
                f"({len(chains)} enumerated)"
            )
        record.chain = best

        self._transition(record, LifecycleState.RENDERING)
        self._step(record, "render_manifests")
        manifests = render_manifests(record.deployment_id, order, best)
        self._write_manifests(manifests)
        self._step(record, "render_manifests", "after")

        self._transition(record, LifecycleState.DEPLOYING)
        self._step(record, "create_units")
        self._create_units(record, order, best, compensation)
        self._step(record, "create_units", "after")

        self._step(record, "record_deployment")
        self.deployment_catalog.persist()
        self._step(record, "record_deployment", "after")

        self._transition(record, LifecycleState.CONFIGURING)
        self._step(record, "push_configs")
        for kind in UNIT_CREATION_ORDER:
            self.controller.push_config(record.deployment_id, kind, unit_config(manifests[kind]))
        self._step(record, "push_configs", "after")

        self._transition(record, LifecycleState.AFFILIATING)
        self._step(record, "affiliate_units")
        self.controller.affiliate(record.deployment_id, record.units)
        self._step(record, "affiliate_units", "after")

        self._step(record, "start_units")
        self.controller.start_units(record.deployment_id, self.unit_start_delay_s)
        self._step(record, "start_units", "after")

        self._log(record, "running")
        self._transition(record, LifecycleState.RUNNING)
        self.resource_catalog.refresh(self.topology)

    def _create_units(
        self,
        record: DeploymentRecord,
        order: ServiceOrder,
        chain: ChainCandidate,
        compensation: list[Callable[[], None]],
    ) -> None:
        node_ids = {
            UnitKind.CU: chain.cu_node_id,
            UnitKind.DU: chain.du_node_id,
            UnitKind.RU: chain.ru_node_id,
        }
        for kind in UNIT_CREATION_ORDER:
            node = self.topology.node(node_ids[kind])
            demand = order.constraints.demand(kind)

            node.reserve(demand)
            compensation.append(lambda n=node, d=demand: n.release(d))

            address = self.ip_pool.lease(f"{record.deployment_id}/{kind.value.lower()}")
            compensation.append(lambda a=address: self.ip_pool.release(a))

            serial = None
            if kind is UnitKind.RU:
                serial = chain.antenna_serial
                node.claim_antenna(serial, record.deployment_id)
                compensation.append(
                    lambda n=node, s=serial: n.release_antenna(s, record.deployment_id)
                )

            unit = UnitRecord(
                unit_kind=kind,
                node_id=node.id,
                ip_address=address,
                antenna_serial=serial,
            )
            record.units[kind] = unit
            self.controller.spawn_agent(record.deployment_id, kind, unit)

    def _write_manifests(self, manifests: Mapping[UnitKind, Manifest]) -> None:
        if self.data_dir is None:
            return
        for kind, manifest in manifests.items():
            path = (
                self.data_dir
                / MANIFESTS_DIRNAME
                / manifest.deployment_id
                / f"{kind.value.lower()}.json"
            )
            write_json_atomic(path, manifest.to_dict())

    def _abort(
        self,
        record: DeploymentRecord,
        compensation: list[Callable[[], None]],
        reason: str,
    ) -> None:
        """Undo every acquired resource in reverse order, then park the
        record in Aborted. Rollback errors are collected, not masked."""
        errors: list[Exception] = []
        for undo in reversed(compensation):
            try:
                undo()
            except Exception as exc:  # noqa: BLE001 - keep unwinding
                errors.append(exc)
        self.controller.despawn_agents(record.deployment_id)
        record.units.clear()
        record.abort_reason = reason
        self._log(record, "abort", reason)
        check_transition(record.lifecycle, LifecycleState.ABORTED)
        record.lifecycle = LifecycleState.ABORTED
        self.deployment_catalog.put(record)
        self.resource_catalog.refresh(self.topology)
        if errors:
            raise errors[0]

    def teardown(self, deployment_id: str) -> DeploymentRecord:
        """Stop a Running deployment and free everything it holds."""
        record = self.deployment_catalog.get(deployment_id)
        self._transition(record, LifecycleState.DELETING)
        self._step(record, "stop_units")
        for kind in reversed(UNIT_CREATION_ORDER):
            unit = record.units.get(kind)
            if unit is not None:
                unit.state = UnitState.STOPPED
        self.controller.despawn_agents(deployment_id)
        self._step(record, "stop_units", "after")

        self._step(record, "release_resources")
        for kind in reversed(UNIT_CREATION_ORDER):
            unit = record.units.get(kind)
            if unit is None:
                continue
            node = self.topology.node(unit.node_id)
            if unit.antenna_serial is not None:
                node.release_antenna(unit.antenna_serial, deployment_id)
            if unit.ip_address is not None:
                self.ip_pool.release(unit.ip_address)
            node.release(record.order.constraints.demand(kind))
        self._step(record, "release_resources", "after")

        self._transition(record, LifecycleState.DELETED)
        self.resource_catalog.refresh(self.topology)
        return record
