"""Resource and deployment catalogs with JSON file-snapshot persistence.

The resource catalog is a pure projection of the substrate (free capacity
and free antennas per node); the deployment catalog owns the runtime
records of RAN chains. Both are shared state: reads are cheap snapshots,
writes serialize behind a lock, and file snapshots are written atomically
(write-temp-rename).
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .clock import Clock
from .lifecycle import LifecycleState, advances
from .placement import ChainCandidate, ServiceOrder, UnitKind, parse_service_order
from .substrate import CloudTier, GeoPosition, Node, Topology, UnknownNodeError

logger = logging.getLogger(__name__)

RESOURCE_CATALOG_FILENAME = "resource_catalog.json"
DEPLOYMENT_CATALOG_FILENAME = "deployment_catalog.json"


class CatalogError(Exception):
    """Base class for catalog failures."""


class UnknownDeploymentError(CatalogError):
    """Referenced deployment id is not in the catalog."""


class CatalogConflictError(CatalogError):
    """Overwrite with a non-advancing lifecycle was rejected."""


class DeploymentStateError(CatalogError):
    """Operation not allowed in the deployment's current lifecycle state."""


def write_json_atomic(path: Path, doc: object) -> None:
    """Write JSON crash-safely: temp file in the same directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            json.dump(doc, handle, indent=2, sort_keys=True)
            handle.write("\n")
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


@dataclass(frozen=True)
class ResourceCatalogEntry:
    node_id: str
    tier: CloudTier
    position: GeoPosition
    free_cpu_millicores: int
    free_ram_mb: int
    free_disk_mb: int
    antenna_serials_available: tuple[str, ...]
    last_refreshed: float

    def to_dict(self) -> dict:
        return {
            "nodeId": self.node_id,
            "tier": self.tier.value,
            "position": self.position.to_dict(),
            "freeCpuMillicores": self.free_cpu_millicores,
            "freeRamMb": self.free_ram_mb,
            "freeDiskMb": self.free_disk_mb,
            "antennaSerialsAvailable": list(self.antenna_serials_available),
        }

    @classmethod
    def from_node(cls, node: Node, stamp: float) -> "ResourceCatalogEntry":
        return cls(
            node_id=node.id,
            tier=node.tier,
            position=node.position,
            free_cpu_millicores=node.free_cpu_millicores,
            free_ram_mb=node.free_ram_mb,
            free_disk_mb=node.free_disk_mb,
            antenna_serials_available=tuple(
                sorted(a.serial for a in node.available_antennas())
            ),
            last_refreshed=stamp,
        )

    @classmethod
    def from_dict(cls, doc: dict, stamp: float) -> "ResourceCatalogEntry":
        return cls(
            node_id=doc["nodeId"],
            tier=CloudTier(doc["tier"]),
            position=GeoPosition(doc["position"]["lat"], doc["position"]["lon"]),
            free_cpu_millicores=doc["freeCpuMillicores"],
            free_ram_mb=doc["freeRamMb"],
            free_disk_mb=doc["freeDiskMb"],
            antenna_serials_available=tuple(doc["antennaSerialsAvailable"]),
            last_refreshed=stamp,
        )


class ResourceCatalog:
    """Periodically refreshed view of free capacity and free antennas.

    Recomputed from scratch on every refresh, so it is always exactly the
    function of the substrate state it claims to be.
    """

    def __init__(self, clock: Clock, data_dir: Path | None = None):
        self._clock = clock
        self._data_dir = Path(data_dir) if data_dir is not None else None
        self._entries: dict[str, ResourceCatalogEntry] = {}
        self._last_refreshed: float | None = None
        self._lock = threading.RLock()

    @property
    def snapshot_path(self) -> Path | None:
        if self._data_dir is None:
            return None
        return self._data_dir / RESOURCE_CATALOG_FILENAME

    @property
    def last_refreshed(self) -> float | None:
        return self._last_refreshed

    def refresh(self, topology: Topology) -> list[ResourceCatalogEntry]:
        """Rebuild every entry from the substrate; readers never see a
        half-applied refresh."""
        stamp = self._clock.now()
        fresh = {
            node_id: ResourceCatalogEntry.from_node(node, stamp)
            for node_id, node in sorted(topology.nodes.items())
        }
        with self._lock:
            self._entries = fresh
            self._last_refreshed = stamp
            self._persist()
        return list(fresh.values())

    def entries(self) -> list[ResourceCatalogEntry]:
        with self._lock:
            return [self._entries[k] for k in sorted(self._entries)]

    def entry(self, node_id: str) -> ResourceCatalogEntry:
        with self._lock:
            try:
                return self._entries[node_id]
            except KeyError:
                raise UnknownNodeError(f"no catalog entry for node {node_id}") from None

    def snapshot_dict(self) -> dict:
        """Snapshot document; the refresh stamp sits outside the entries so
        that entry content can be compared across refreshes."""
        with self._lock:
            return {
                "lastRefreshed": self._last_refreshed,
                "entries": [e.to_dict() for e in self.entries()],
            }

    def _persist(self) -> None:
        if self.snapshot_path is not None:
            write_json_atomic(self.snapshot_path, self.snapshot_dict())

    @classmethod
    def load(cls, path: Path, clock: Clock) -> "ResourceCatalog":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        catalog = cls(clock)
        stamp = doc["lastRefreshed"]
        catalog._entries = {
            e["nodeId"]: ResourceCatalogEntry.from_dict(e, stamp) for e in doc["entries"]
        }
        catalog._last_refreshed = stamp
        return catalog

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ResourceCatalog):
            return NotImplemented
        return (
            self._entries == other._entries
            and self._last_refreshed == other._last_refreshed
        )


class UnitState(str, Enum):
    CREATED = "Created"
    CONFIGURED = "Configured"
    AFFILIATED = "Affiliated"
    RUNNING = "Running"
    STOPPED = "Stopped"


@dataclass
class UnitRecord:
    """Runtime state of one RAN unit (CU, DU or RU)."""

    unit_kind: UnitKind
    node_id: str
    ip_address: str | None = None
    antenna_serial: str | None = None
    config: dict = field(default_factory=dict)
    state: UnitState = UnitState.CREATED

    def __post_init__(self) -> None:
        if (self.antenna_serial is not None) != (self.unit_kind is UnitKind.RU):
            raise ValueError("antennaSerial must be present exactly for RU units")

    def to_dict(self) -> dict:
        return {
            "unitKind": self.unit_kind.value,
            "nodeId": self.node_id,
            "ipAddress": self.ip_address,
            "antennaSerial": self.antenna_serial,
            "config": dict(self.config),
            "state": self.state.value,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "UnitRecord":
        return cls(
            unit_kind=UnitKind(doc["unitKind"]),
            node_id=doc["nodeId"],
            ip_address=doc.get("ipAddress"),
            antenna_serial=doc.get("antennaSerial"),
            config=dict(doc.get("config", {})),
            state=UnitState(doc["state"]),
        )


@dataclass(frozen=True)
class EventLogEntry:
    timestamp: float
    step: str
    detail: str | None = None

    def to_dict(self) -> dict:
        return {"timestamp": self.timestamp, "step": self.step, "detail": self.detail}

    @classmethod
    def from_dict(cls, doc: dict) -> "EventLogEntry":
        return cls(timestamp=doc["timestamp"], step=doc["step"], detail=doc.get("detail"))


@dataclass
class DeploymentRecord:
    """Everything known about one Cloud-RAN deployment."""

    deployment_id: str
    tag: str
    order: ServiceOrder
    created_at: float
    lifecycle: LifecycleState = LifecycleState.PENDING
    chain: ChainCandidate | None = None
    units: dict[UnitKind, UnitRecord] = field(default_factory=dict)
    event_log: list[EventLogEntry] = field(default_factory=list)
    abort_reason: str | None = None

    def unit(self, kind: UnitKind) -> UnitRecord:
        return self.units[kind]

    def log_event(self, timestamp: float, step: str, detail: str | None = None) -> EventLogEntry:
        if self.event_log and timestamp < self.event_log[-1].timestamp:
            raise ValueError("event log timestamps must be monotonic")
        entry = EventLogEntry(timestamp=timestamp, step=step, detail=detail)
        self.event_log.append(entry)
        return entry

    def event_timestamp(self, step: str) -> float | None:
        for entry in self.event_log:
            if entry.step == step:
                return entry.timestamp
        return None

    def to_dict(self) -> dict:
        return {
            "deploymentId": self.deployment_id,
            "tag": self.tag,
            "order": self.order.to_dict(),
            "createdAt": self.created_at,
            "lifecycle": self.lifecycle.value,
            "chain": self.chain.to_dict() if self.chain else None,
            "units": {
                kind.value.lower(): unit.to_dict() for kind, unit in self.units.items()
            }
            or None,
            "eventLog": [e.to_dict() for e in self.event_log],
            "abortReason": self.abort_reason,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "DeploymentRecord":
        units = {}
        for key, unit_doc in (doc.get("units") or {}).items():
            kind = UnitKind(key.upper())
            units[kind] = UnitRecord.from_dict(unit_doc)
        return cls(
            deployment_id=doc["deploymentId"],
            tag=doc["tag"],
            order=parse_service_order(doc["order"]),
            created_at=doc["createdAt"],
            lifecycle=LifecycleState(doc["lifecycle"]),
            chain=ChainCandidate.from_dict(doc["chain"]) if doc.get("chain") else None,
            units=units,
            event_log=[EventLogEntry.from_dict(e) for e in doc.get("eventLog", [])],
            abort_reason=doc.get("abortReason"),
        )


class DeploymentCatalog:
    """Deployment records keyed by id, ordered by creation.

    Overwrites must advance the lifecycle; ids are never reused within a
    catalog lifetime.
    """

    def __init__(self, data_dir: Path | None = None):
        self._data_dir = Path(data_dir) if data_dir is not None else None
        self._records: dict[str, DeploymentRecord] = {}
        self._last_put: dict[str, LifecycleState] = {}
        self._counter = 0
        self._lock = threading.RLock()

    @property
    def snapshot_path(self) -> Path | None:
        if self._data_dir is None:
            return None
        return self._data_dir / DEPLOYMENT_CATALOG_FILENAME

    def allocate_id(self) -> str:
        with self._lock:
            self._counter += 1
            return f"d-{self._counter:03d}"

    def put(self, record: DeploymentRecord) -> None:
        with self._lock:
            previous = self._last_put.get(record.deployment_id)
            if previous is not None and not advances(previous, record.lifecycle):
                raise CatalogConflictError(
                    f"{record.deployment_id}: lifecycle {previous.value} -> "
                    f"{record.lifecycle.value} does not advance"
                )
            self._records[record.deployment_id] = record
            self._last_put[record.deployment_id] = record.lifecycle
            suffix = record.deployment_id.rpartition("-")[2]
            if suffix.isdigit():
                self._counter = max(self._counter, int(suffix))
            self._persist()

    def get(self, deployment_id: str) -> DeploymentRecord:
        with self._lock:
            try:
                return self._records[deployment_id]
            except KeyError:
                raise UnknownDeploymentError(f"unknown deployment {deployment_id}") from None

    def list(
        self,
        tag: str | None = None,
        state: LifecycleState | None = None,
    ) -> list[DeploymentRecord]:
        with self._lock:
            records = list(self._records.values())
        if tag is not None:
            records = [r for r in records if r.tag == tag]
        if state is not None:
            records = [r for r in records if r.lifecycle == state]
        return records

    def delete(self, deployment_id: str) -> DeploymentRecord:
        """Remove a record; only Running or terminal deployments may go.

        Resource release is the deployment engine's teardown job, not ours.
        """
        with self._lock:
            record = self.get(deployment_id)
            if record.lifecycle is not LifecycleState.RUNNING and not record.lifecycle.is_terminal:
                raise DeploymentStateError(
                    f"cannot delete {deployment_id} in state {record.lifecycle.value}"
                )
            del self._records[deployment_id]
            self._persist()
            return record

    def persist(self) -> None:
        """Rewrite the snapshot without a lifecycle change (records are
        shared objects, so field mutations are otherwise invisible to the
        file until the next put)."""
        with self._lock:
            self._persist()

    def snapshot_dict(self) -> dict:
        with self._lock:
            return {
                "counter": self._counter,
                "records": [r.to_dict() for r in self._records.values()],
            }

    def _persist(self) -> None:
        if self.snapshot_path is not None:
            write_json_atomic(self.snapshot_path, self.snapshot_dict())

    @classmethod
    def load(cls, path: Path, data_dir: Path | None = None) -> "DeploymentCatalog":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        catalog = cls(data_dir=data_dir)
        catalog._counter = doc["counter"]
        for record_doc in doc["records"]:
            record = DeploymentRecord.from_dict(record_doc)
            catalog._records[record.deployment_id] = record
            catalog._last_put[record.deployment_id] = record.lifecycle
            # Keep the counter past externally numbered records so future
            # allocations never collide.
            suffix = record.deployment_id.rpartition("-")[2]
            if suffix.isdigit():
                catalog._counter = max(catalog._counter, int(suffix))
        return catalog

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DeploymentCatalog):
            return NotImplemented
        return self._counter == other._counter and self._records == other._records


def refresh_resource_catalog(
    catalog: ResourceCatalog, topology: Topology
) -> list[ResourceCatalogEntry]:
    return catalog.refresh(topology)
