"""Three-tier substrate network model.

Nodes live in one of three cloud tiers (Regional, Edge, FarEdge), carry
CPU/RAM/disk capacity counters and, on FarEdge nodes only, physical
antennas. Links are undirected with a declared latency and bandwidth;
path metrics are derived from them instead of live probing.
"""

from __future__ import annotations

import heapq
import json
import logging
import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

logger = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0

#: Sentinel metrics for a disconnected node pair: placement filters these
#: out uniformly instead of special-casing errors.
INFEASIBLE_LATENCY_MS = math.inf
UNBOUNDED_BANDWIDTH_MBPS = math.inf


class SubstrateError(Exception):
    """Base class for substrate-level failures."""


class TopologyValidationError(SubstrateError):
    """Topology document violates the schema or an invariant."""


class UnknownNodeError(SubstrateError):
    """Operation referenced a node id that is not in the topology."""


class InsufficientCapacityError(SubstrateError):
    """Reservation would exceed a node's capacity; nothing was reserved."""


class ReleaseUnderflowError(SubstrateError):
    """Release asked for more than is currently reserved (accounting bug)."""


class AntennaUnavailableError(SubstrateError):
    """Antenna is unknown, already occupied, or not held by the caller."""


class CloudTier(str, Enum):
    REGIONAL = "Regional"
    EDGE = "Edge"
    FAR_EDGE = "FarEdge"


@dataclass(frozen=True)
class GeoPosition:
    latitude_deg: float
    longitude_deg: float

    def __post_init__(self) -> None:
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise TopologyValidationError(
                f"latitude {self.latitude_deg} outside [-90, 90]"
            )
        if not -180.0 <= self.longitude_deg <= 180.0:
            raise TopologyValidationError(
                f"longitude {self.longitude_deg} outside [-180, 180]"
            )

    def to_dict(self) -> dict:
        return {"lat": self.latitude_deg, "lon": self.longitude_deg}


def geo_distance_km(p1: GeoPosition, p2: GeoPosition) -> float:
    """Great-circle (haversine) distance in kilometers, spherical Earth."""
    phi1 = math.radians(p1.latitude_deg)
    phi2 = math.radians(p2.latitude_deg)
    dphi = math.radians(p2.latitude_deg - p1.latitude_deg)
    dlam = math.radians(p2.longitude_deg - p1.longitude_deg)
    a = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(a)))


@dataclass(frozen=True)
class ResourceDemand:
    """A CPU/RAM/disk triple; units follow container-orchestration conventions."""

    cpu_millicores: int = 0
    ram_mb: int = 0
    disk_mb: int = 0

    def __post_init__(self) -> None:
        for name in ("cpu_millicores", "ram_mb", "disk_mb"):
            if getattr(self, name) < 0:
                raise ValueError(f"demand {name} must be >= 0")

    def __add__(self, other: "ResourceDemand") -> "ResourceDemand":
        return ResourceDemand(
            self.cpu_millicores + other.cpu_millicores,
            self.ram_mb + other.ram_mb,
            self.disk_mb + other.disk_mb,
        )

    def to_dict(self) -> dict:
        return {
            "cpuMillicores": self.cpu_millicores,
            "ramMb": self.ram_mb,
            "diskMb": self.disk_mb,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ResourceDemand":
        _require_keys(doc, {"cpuMillicores", "ramMb", "diskMb"}, set(), "demand")
        return cls(
            cpu_millicores=int(doc["cpuMillicores"]),
            ram_mb=int(doc["ramMb"]),
            disk_mb=int(doc["diskMb"]),
        )


@dataclass
class Antenna:
    serial: str
    position: GeoPosition
    occupied_by: str | None = None

    @property
    def is_available(self) -> bool:
        return self.occupied_by is None


@dataclass
class Node:
    """A substrate node; capacity counters mutate behind a per-node lock."""

    id: str
    tier: CloudTier
    position: GeoPosition
    cpu_capacity_millicores: int
    ram_capacity_mb: int
    disk_capacity_mb: int
    cpu_used_millicores: int = 0
    ram_used_mb: int = 0
    disk_used_mb: int = 0
    antennas: list[Antenna] = field(default_factory=list)
    _lock: threading.Lock = field(
        default_factory=threading.Lock, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        for name in (
            "cpu_capacity_millicores",
            "ram_capacity_mb",
            "disk_capacity_mb",
            "cpu_used_millicores",
            "ram_used_mb",
            "disk_used_mb",
        ):
            if getattr(self, name) < 0:
                raise TopologyValidationError(f"node {self.id}: {name} must be >= 0")
        if (
            self.cpu_used_millicores > self.cpu_capacity_millicores
            or self.ram_used_mb > self.ram_capacity_mb
            or self.disk_used_mb > self.disk_capacity_mb
        ):
            raise TopologyValidationError(f"node {self.id}: used exceeds capacity")
        if self.antennas and self.tier is not CloudTier.FAR_EDGE:
            raise TopologyValidationError(f"antenna on non-FarEdge node {self.id}")

    @property
    def free_cpu_millicores(self) -> int:
        return self.cpu_capacity_millicores - self.cpu_used_millicores

    @property
    def free_ram_mb(self) -> int:
        return self.ram_capacity_mb - self.ram_used_mb

    @property
    def free_disk_mb(self) -> int:
        return self.disk_capacity_mb - self.disk_used_mb

    def can_fit(self, demand: ResourceDemand) -> bool:
        return (
            demand.cpu_millicores <= self.free_cpu_millicores
            and demand.ram_mb <= self.free_ram_mb
            and demand.disk_mb <= self.free_disk_mb
        )

    def reserve(self, demand: ResourceDemand) -> None:
        """Atomically check and reserve; rejects without partial effects."""
        with self._lock:
            if not self.can_fit(demand):
                raise InsufficientCapacityError(
                    f"node {self.id} cannot fit demand {demand}"
                )
            self.cpu_used_millicores += demand.cpu_millicores
            self.ram_used_mb += demand.ram_mb
            self.disk_used_mb += demand.disk_mb

    def release(self, demand: ResourceDemand) -> None:
        with self._lock:
            if (
                demand.cpu_millicores > self.cpu_used_millicores
                or demand.ram_mb > self.ram_used_mb
                or demand.disk_mb > self.disk_used_mb
            ):
                raise ReleaseUnderflowError(
                    f"node {self.id}: release {demand} exceeds current usage"
                )
            self.cpu_used_millicores -= demand.cpu_millicores
            self.ram_used_mb -= demand.ram_mb
            self.disk_used_mb -= demand.disk_mb

    def antenna(self, serial: str) -> Antenna:
        for antenna in self.antennas:
            if antenna.serial == serial:
                return antenna
        raise AntennaUnavailableError(f"node {self.id} has no antenna {serial}")

    def available_antennas(self) -> list[Antenna]:
        with self._lock:
            return [a for a in self.antennas if a.is_available]

    def claim_antenna(self, serial: str, deployment_id: str) -> Antenna:
        """Atomic check-and-claim; at most one deployment holds an antenna."""
        with self._lock:
            antenna = self.antenna(serial)
            if antenna.occupied_by is not None:
                raise AntennaUnavailableError(
                    f"antenna {serial} already occupied by {antenna.occupied_by}"
                )
            antenna.occupied_by = deployment_id
            return antenna

    def release_antenna(self, serial: str, deployment_id: str) -> None:
        with self._lock:
            antenna = self.antenna(serial)
            if antenna.occupied_by != deployment_id:
                raise AntennaUnavailableError(
                    f"antenna {serial} is not held by {deployment_id}"
                )
            antenna.occupied_by = None


@dataclass(frozen=True)
class Link:
    endpoint_a: str
    endpoint_b: str
    latency_ms: float
    bandwidth_mbps: float

    def __post_init__(self) -> None:
        if self.endpoint_a == self.endpoint_b:
            raise TopologyValidationError(
                f"link endpoints must differ (got {self.endpoint_a} twice)"
            )
        if self.latency_ms <= 0:
            raise TopologyValidationError("link latency must be > 0 ms")
        if self.bandwidth_mbps <= 0:
            raise TopologyValidationError("link bandwidth must be > 0 Mbps")


@dataclass(frozen=True)
class PathMetrics:
    latency_ms: float
    bandwidth_mbps: float

    @property
    def is_feasible(self) -> bool:
        return math.isfinite(self.latency_ms)


class Topology:
    """Validated substrate graph; structure is immutable after construction."""

    def __init__(self, nodes: dict[str, Node], links: list[Link]):
        self.nodes = nodes
        self.links = links
        self._validate()
        self._adjacency: dict[str, list[tuple[str, float, float]]] = {
            node_id: [] for node_id in nodes
        }
        for link in links:
            self._adjacency[link.endpoint_a].append(
                (link.endpoint_b, link.latency_ms, link.bandwidth_mbps)
            )
            self._adjacency[link.endpoint_b].append(
                (link.endpoint_a, link.latency_ms, link.bandwidth_mbps)
            )

    def _validate(self) -> None:
        serials: set[str] = set()
        for node_id, node in self.nodes.items():
            if node.id != node_id:
                raise TopologyValidationError(
                    f"node map key {node_id!r} differs from node id {node.id!r}"
                )
            for antenna in node.antennas:
                if antenna.serial in serials:
                    raise TopologyValidationError(
                        f"duplicate antenna serial {antenna.serial}"
                    )
                serials.add(antenna.serial)
        for link in self.links:
            for endpoint in (link.endpoint_a, link.endpoint_b):
                if endpoint not in self.nodes:
                    raise TopologyValidationError(
                        f"link references unknown node {endpoint}"
                    )

    def node(self, node_id: str) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNodeError(f"unknown node {node_id}") from None

    def find_antenna(self, serial: str) -> tuple[Node, Antenna]:
        for node in self.nodes.values():
            for antenna in node.antennas:
                if antenna.serial == serial:
                    return node, antenna
        raise AntennaUnavailableError(f"no antenna {serial} in topology")

    def path_metrics(self, a: str, b: str) -> PathMetrics:
        """Metrics of the minimum-latency path between two nodes.

        Among equal-latency paths the one with the widest bottleneck is
        reported, which makes the result a pure function of the pair and
        therefore symmetric. Disconnected pairs get the infeasible
        sentinel rather than an error.
        """
        self.node(a)
        self.node(b)
        if a == b:
            return PathMetrics(0.0, UNBOUNDED_BANDWIDTH_MBPS)
        # Always search from the lexicographically smaller endpoint:
        # float summation order would otherwise make the two directions
        # differ in the last bit.
        if b < a:
            a, b = b, a

        best: dict[str, tuple[float, float]] = {a: (0.0, UNBOUNDED_BANDWIDTH_MBPS)}
        frontier: list[tuple[float, float, str]] = [(0.0, -UNBOUNDED_BANDWIDTH_MBPS, a)]
        visited: set[str] = set()
        while frontier:
            latency, neg_width, current = heapq.heappop(frontier)
            if current in visited:
                continue
            visited.add(current)
            if current == b:
                return PathMetrics(latency, -neg_width)
            for neighbor, link_latency, link_bw in self._adjacency[current]:
                cand_latency = latency + link_latency
                cand_width = min(-neg_width, link_bw)
                known = best.get(neighbor)
                if (
                    known is None
                    or cand_latency < known[0]
                    or (cand_latency == known[0] and cand_width > known[1])
                ):
                    best[neighbor] = (cand_latency, cand_width)
                    heapq.heappush(frontier, (cand_latency, -cand_width, neighbor))
        return PathMetrics(INFEASIBLE_LATENCY_MS, 0.0)


def _require_keys(doc: dict, required: set[str], optional: set[str], context: str) -> None:
    if not isinstance(doc, dict):
        raise TopologyValidationError(f"{context}: expected an object")
    missing = required - doc.keys()
    if missing:
        raise TopologyValidationError(f"{context}: missing fields {sorted(missing)}")
    unknown = doc.keys() - required - optional
    if unknown:
        raise TopologyValidationError(f"{context}: unknown fields {sorted(unknown)}")


def _parse_position(doc: dict, context: str) -> GeoPosition:
    _require_keys(doc, {"lat", "lon"}, set(), context)
    return GeoPosition(float(doc["lat"]), float(doc["lon"]))


def _parse_antenna(doc: dict, node_id: str) -> Antenna:
    _require_keys(doc, {"serial", "position"}, set(), f"antenna on {node_id}")
    return Antenna(
        serial=str(doc["serial"]),
        position=_parse_position(doc["position"], f"antenna {doc['serial']} position"),
    )


def _parse_node(doc: dict) -> Node:
    _require_keys(
        doc,
        {"id", "tier", "position", "cpuMillicores", "ramMb", "diskMb"},
        {"antennas"},
        "node",
    )
    node_id = str(doc["id"])
    try:
        tier = CloudTier(doc["tier"])
    except ValueError:
        raise TopologyValidationError(
            f"node {node_id}: unknown tier {doc['tier']!r}"
        ) from None
    return Node(
        id=node_id,
        tier=tier,
        position=_parse_position(doc["position"], f"node {node_id} position"),
        cpu_capacity_millicores=int(doc["cpuMillicores"]),
        ram_capacity_mb=int(doc["ramMb"]),
        disk_capacity_mb=int(doc["diskMb"]),
        antennas=[_parse_antenna(a, node_id) for a in doc.get("antennas", [])],
    )


def topology_from_dict(doc: dict) -> Topology:
    _require_keys(doc, {"nodes"}, {"links"}, "topology")
    nodes: dict[str, Node] = {}
    for node_doc in doc["nodes"]:
        node = _parse_node(node_doc)
        if node.id in nodes:
            raise TopologyValidationError(f"duplicate node id {node.id!r}")
        nodes[node.id] = node
    links = []
    for link_doc in doc.get("links", []):
        _require_keys(link_doc, {"a", "b", "latencyMs", "bandwidthMbps"}, set(), "link")
        links.append(
            Link(
                endpoint_a=str(link_doc["a"]),
                endpoint_b=str(link_doc["b"]),
                latency_ms=float(link_doc["latencyMs"]),
                bandwidth_mbps=float(link_doc["bandwidthMbps"]),
            )
        )
    return Topology(nodes, links)


def parse_topology(document: str) -> Topology:
    """Parse and validate a JSON topology document."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise TopologyValidationError(f"topology is not valid JSON: {exc}") from exc
    return topology_from_dict(doc)


def load_topology(path: str | Path) -> Topology:
    """Load a topology document from a file."""
    text = Path(path).read_text(encoding="utf-8")
    topology = parse_topology(text)
    logger.info(
        "loaded topology: %d nodes, %d links", len(topology.nodes), len(topology.links)
    )
    return topology
