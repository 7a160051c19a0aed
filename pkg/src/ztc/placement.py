"""Chain placement: discovery, enumeration, validation, scoring, selection.

A deployment request asks for one CU/DU/RU chain plus an antenna. Candidate
nodes are discovered per role from the resource catalog, combined into
chains, validated against the order's latency/bandwidth/capacity/coverage
constraints, scored, and the best-scoring chain is selected. An exhaustive
brute-force selector over all (cu, du, ru, antenna) tuples doubles as the
test oracle for the whole pipeline.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Mapping

from .substrate import (
    GeoPosition,
    CloudTier,
    ResourceDemand,
    Topology,
    geo_distance_km,
)

if TYPE_CHECKING:
    from .catalogs import ResourceCatalogEntry

logger = logging.getLogger(__name__)


class PlacementError(Exception):
    """Base class for placement failures."""


class OrderValidationError(PlacementError):
    """Service order document violates the order schema."""


class ScoringError(PlacementError):
    """Asked to score a chain whose probe did not pass."""


class UnitKind(str, Enum):
    CU = "CU"
    DU = "DU"
    RU = "RU"


#: Scenario-F tier mapping: which tier hosts which unit by default.
SCENARIO_F_TIERS: dict[UnitKind, CloudTier] = {
    UnitKind.CU: CloudTier.REGIONAL,
    UnitKind.DU: CloudTier.EDGE,
    UnitKind.RU: CloudTier.FAR_EDGE,
}

# Default latency budgets in milliseconds. Fronthaul and end-to-end both
# default to 1 ms; midhaul to 10 ms (regional-cloud distance). All are
# per-order knobs.
DEFAULT_FRONTHAUL_LATENCY_MS_MAX = 1.0
DEFAULT_MIDHAUL_LATENCY_MS_MAX = 10.0
DEFAULT_END_TO_END_LATENCY_MS_MAX = 1.0

# Fronthaul bandwidth floor for a 32-user cell with a 7.3 functional split;
# scaled linearly with the ordered user count. A documented default, not a
# measured figure.
FRONTHAUL_BANDWIDTH_MBPS_PER_32_USERS = 1000.0

DEFAULT_PER_UNIT_DEMAND: dict[UnitKind, ResourceDemand] = {
    UnitKind.CU: ResourceDemand(cpu_millicores=1000, ram_mb=1024, disk_mb=2048),
    UnitKind.DU: ResourceDemand(cpu_millicores=1500, ram_mb=2048, disk_mb=2048),
    UnitKind.RU: ResourceDemand(cpu_millicores=500, ram_mb=512, disk_mb=1024),
}

SCORE_WEIGHT_LATENCY = 0.4
SCORE_WEIGHT_BANDWIDTH = 0.2
SCORE_WEIGHT_COMPUTE = 0.2
SCORE_WEIGHT_PROXIMITY = 0.2


@dataclass(frozen=True)
class PlacementConstraints:
    fronthaul_latency_ms_max: float = DEFAULT_FRONTHAUL_LATENCY_MS_MAX
    midhaul_latency_ms_max: float = DEFAULT_MIDHAUL_LATENCY_MS_MAX
    end_to_end_latency_ms_max: float = DEFAULT_END_TO_END_LATENCY_MS_MAX
    fronthaul_bandwidth_mbps_min: float = FRONTHAUL_BANDWIDTH_MBPS_PER_32_USERS
    per_unit_demand: Mapping[UnitKind, ResourceDemand] = field(
        default_factory=lambda: dict(DEFAULT_PER_UNIT_DEMAND)
    )

    def __post_init__(self) -> None:
        for name in (
            "fronthaul_latency_ms_max",
            "midhaul_latency_ms_max",
            "end_to_end_latency_ms_max",
            "fronthaul_bandwidth_mbps_min",
        ):
            if getattr(self, name) <= 0:
                raise OrderValidationError(f"constraint {name} must be > 0")
        missing = set(UnitKind) - set(self.per_unit_demand)
        if missing:
            raise OrderValidationError(
                f"perUnitDemand missing unit kinds {sorted(k.value for k in missing)}"
            )

    def demand(self, kind: UnitKind) -> ResourceDemand:
        return self.per_unit_demand[kind]

    def to_dict(self) -> dict:
        return {
            "fronthaulLatencyMsMax": self.fronthaul_latency_ms_max,
            "midhaulLatencyMsMax": self.midhaul_latency_ms_max,
            "endToEndLatencyMsMax": self.end_to_end_latency_ms_max,
            "fronthaulBandwidthMbpsMin": self.fronthaul_bandwidth_mbps_min,
            "perUnitDemand": {
                kind.value.lower(): self.per_unit_demand[kind].to_dict()
                for kind in UnitKind
            },
        }


@dataclass(frozen=True)
class ServiceOrder:
    """A negotiated deployment request for one Cloud-RAN chain."""

    tag: str
    coverage_center: GeoPosition
    coverage_radius_km: float
    max_users: int
    spectrum_band: str = "n78"
    constraints: PlacementConstraints = field(default_factory=PlacementConstraints)

    def __post_init__(self) -> None:
        if self.coverage_radius_km <= 0:
            raise OrderValidationError("coverageRadiusKm must be > 0")
        if self.max_users <= 0:
            raise OrderValidationError("maxUsers must be > 0")

    def to_dict(self) -> dict:
        return {
            "tag": self.tag,
            "coverageCenter": self.coverage_center.to_dict(),
            "coverageRadiusKm": self.coverage_radius_km,
            "maxUsers": self.max_users,
            "spectrumBand": self.spectrum_band,
            "constraints": self.constraints.to_dict(),
        }


def _order_field(doc: dict, key: str, caster, context: str = "order"):
    try:
        return caster(doc[key])
    except (TypeError, ValueError) as exc:
        raise OrderValidationError(f"{context}: bad value for {key}: {exc}") from exc


def parse_service_order(doc: dict) -> ServiceOrder:
    """Parse and validate an order document; unknown fields are rejected."""
    if not isinstance(doc, dict):
        raise OrderValidationError("order must be an object")
    required = {"tag", "coverageCenter", "coverageRadiusKm", "maxUsers"}
    optional = {"spectrumBand", "constraints"}
    missing = required - doc.keys()
    if missing:
        raise OrderValidationError(f"order missing fields {sorted(missing)}")
    unknown = doc.keys() - required - optional
    if unknown:
        raise OrderValidationError(f"order has unknown fields {sorted(unknown)}")

    center_doc = doc["coverageCenter"]
    if not isinstance(center_doc, dict) or set(center_doc) != {"lat", "lon"}:
        raise OrderValidationError("coverageCenter must be {lat, lon}")
    try:
        center = GeoPosition(float(center_doc["lat"]), float(center_doc["lon"]))
    except Exception as exc:
        raise OrderValidationError(f"bad coverageCenter: {exc}") from exc

    max_users = _order_field(doc, "maxUsers", int)
    constraints = _parse_constraints(doc.get("constraints", {}), max_users)
    return ServiceOrder(
        tag=str(doc["tag"]),
        coverage_center=center,
        coverage_radius_km=_order_field(doc, "coverageRadiusKm", float),
        max_users=max_users,
        spectrum_band=str(doc.get("spectrumBand", "n78")),
        constraints=constraints,
    )


def _parse_constraints(doc: dict, max_users: int) -> PlacementConstraints:
    if not isinstance(doc, dict):
        raise OrderValidationError("constraints must be an object")
    known = {
        "fronthaulLatencyMsMax",
        "midhaulLatencyMsMax",
        "endToEndLatencyMsMax",
        "fronthaulBandwidthMbpsMin",
        "perUnitDemand",
    }
    unknown = doc.keys() - known
    if unknown:
        raise OrderValidationError(f"constraints has unknown fields {sorted(unknown)}")

    demand = dict(DEFAULT_PER_UNIT_DEMAND)
    demand_doc = doc.get("perUnitDemand", {})
    if not isinstance(demand_doc, dict):
        raise OrderValidationError("perUnitDemand must be an object")
    kind_by_key = {kind.value.lower(): kind for kind in UnitKind}
    unknown_kinds = demand_doc.keys() - kind_by_key.keys()
    if unknown_kinds:
        raise OrderValidationError(f"perUnitDemand has unknown kinds {sorted(unknown_kinds)}")
    for key, kind in kind_by_key.items():
        if key in demand_doc:
            try:
                demand[kind] = ResourceDemand.from_dict(demand_doc[key])
            except Exception as exc:
                raise OrderValidationError(f"bad perUnitDemand.{key}: {exc}") from exc

    default_bw = FRONTHAUL_BANDWIDTH_MBPS_PER_32_USERS * max_users / 32.0
    return PlacementConstraints(
        fronthaul_latency_ms_max=float(
            doc.get("fronthaulLatencyMsMax", DEFAULT_FRONTHAUL_LATENCY_MS_MAX)
        ),
        midhaul_latency_ms_max=float(
            doc.get("midhaulLatencyMsMax", DEFAULT_MIDHAUL_LATENCY_MS_MAX)
        ),
        end_to_end_latency_ms_max=float(
            doc.get("endToEndLatencyMsMax", DEFAULT_END_TO_END_LATENCY_MS_MAX)
        ),
        fronthaul_bandwidth_mbps_min=float(
            doc.get("fronthaulBandwidthMbpsMin", default_bw)
        ),
        per_unit_demand=demand,
    )


@dataclass
class RoleCandidates:
    cu_nodes: list[str]
    du_nodes: list[str]
    ru_nodes: list[str]
    antennas_by_ru_node: dict[str, list[str]]


@dataclass(frozen=True)
class ChainCandidate:
    cu_node_id: str
    du_node_id: str
    ru_node_id: str
    antenna_serial: str
    score: float | None = None

    @property
    def sort_key(self) -> tuple[str, str, str, str]:
        return (self.ru_node_id, self.du_node_id, self.cu_node_id, self.antenna_serial)

    def to_dict(self) -> dict:
        return {
            "cuNodeId": self.cu_node_id,
            "duNodeId": self.du_node_id,
            "ruNodeId": self.ru_node_id,
            "antennaSerial": self.antenna_serial,
            "score": self.score,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ChainCandidate":
        return cls(
            cu_node_id=doc["cuNodeId"],
            du_node_id=doc["duNodeId"],
            ru_node_id=doc["ruNodeId"],
            antenna_serial=doc["antennaSerial"],
            score=doc.get("score"),
        )


@dataclass(frozen=True)
class ProbeReport:
    fronthaul_latency_ms: float
    midhaul_latency_ms: float
    end_to_end_latency_ms: float
    fronthaul_bandwidth_mbps: float
    capacity_ok: Mapping[str, bool]
    coverage_distance_km: float
    passed: bool
    failed_checks: tuple[str, ...] = ()


def _tier_allows(kind: UnitKind, tier: CloudTier, enforce_tiers: bool) -> bool:
    return not enforce_tiers or tier is SCENARIO_F_TIERS[kind]


def _entry_fits(entry: "ResourceCatalogEntry", demand: ResourceDemand) -> bool:
    return (
        entry.free_cpu_millicores >= demand.cpu_millicores
        and entry.free_ram_mb >= demand.ram_mb
        and entry.free_disk_mb >= demand.disk_mb
    )


def discover(
    order: ServiceOrder,
    entries: Iterable["ResourceCatalogEntry"],
    topology: Topology,
    *,
    enforce_tiers: bool = True,
) -> RoleCandidates:
    """Select per-role hosting candidates from a fresh catalog snapshot.

    RU candidates must additionally own at least one free antenna inside
    the ordered coverage circle; the qualifying serials are reported per
    node. Empty candidate lists are a valid (infeasible) outcome.
    """
    cu_nodes: list[str] = []
    du_nodes: list[str] = []
    ru_nodes: list[str] = []
    antennas: dict[str, list[str]] = {}
    for entry in sorted(entries, key=lambda e: e.node_id):
        node = topology.node(entry.node_id)
        if _tier_allows(UnitKind.CU, node.tier, enforce_tiers) and _entry_fits(
            entry, order.constraints.demand(UnitKind.CU)
        ):
            cu_nodes.append(entry.node_id)
        if _tier_allows(UnitKind.DU, node.tier, enforce_tiers) and _entry_fits(
            entry, order.constraints.demand(UnitKind.DU)
        ):
            du_nodes.append(entry.node_id)
        if _tier_allows(UnitKind.RU, node.tier, enforce_tiers) and _entry_fits(
            entry, order.constraints.demand(UnitKind.RU)
        ):
            in_coverage = sorted(
                serial
                for serial in entry.antenna_serials_available
                if geo_distance_km(node.antenna(serial).position, order.coverage_center)
                <= order.coverage_radius_km
            )
            if in_coverage:
                ru_nodes.append(entry.node_id)
                antennas[entry.node_id] = in_coverage
    return RoleCandidates(
        cu_nodes=cu_nodes,
        du_nodes=du_nodes,
        ru_nodes=ru_nodes,
        antennas_by_ru_node=antennas,
    )


def enumerate_chains(candidates: RoleCandidates) -> list[ChainCandidate]:
    """Cartesian product of role candidates in lexicographic chain order."""
    chains = [
        ChainCandidate(cu, du, ru, serial)
        for ru in candidates.ru_nodes
        for serial in candidates.antennas_by_ru_node.get(ru, [])
        for du in candidates.du_nodes
        for cu in candidates.cu_nodes
    ]
    chains.sort(key=lambda c: c.sort_key)
    return chains


def _demand_by_node(chain: ChainCandidate, order: ServiceOrder) -> dict[str, ResourceDemand]:
    demands: dict[str, ResourceDemand] = {}
    for kind, node_id in (
        (UnitKind.CU, chain.cu_node_id),
        (UnitKind.DU, chain.du_node_id),
        (UnitKind.RU, chain.ru_node_id),
    ):
        demand = order.constraints.demand(kind)
        demands[node_id] = demands.get(node_id, ResourceDemand()) + demand
    return demands


def validate_chain(chain: ChainCandidate, order: ServiceOrder, topology: Topology) -> ProbeReport:
    """Probe one chain against every order constraint.

    Latencies come from the minimum-latency paths between the chain's
    nodes; capacity is checked per node with demands aggregated when two
    units share a node.
    """
    ru_node = topology.node(chain.ru_node_id)
    topology.node(chain.du_node_id)
    topology.node(chain.cu_node_id)
    antenna = ru_node.antenna(chain.antenna_serial)

    fronthaul = topology.path_metrics(chain.ru_node_id, chain.du_node_id)
    midhaul = topology.path_metrics(chain.du_node_id, chain.cu_node_id)
    end_to_end = topology.path_metrics(chain.ru_node_id, chain.cu_node_id)
    capacity_ok = {
        node_id: topology.node(node_id).can_fit(demand)
        for node_id, demand in _demand_by_node(chain, order).items()
    }
    coverage_distance = geo_distance_km(antenna.position, order.coverage_center)

    c = order.constraints
    checks = {
        "fronthaul_latency": fronthaul.latency_ms <= c.fronthaul_latency_ms_max,
        "midhaul_latency": midhaul.latency_ms <= c.midhaul_latency_ms_max,
        "end_to_end_latency": end_to_end.latency_ms <= c.end_to_end_latency_ms_max,
        "fronthaul_bandwidth": fronthaul.bandwidth_mbps >= c.fronthaul_bandwidth_mbps_min,
        "capacity": all(capacity_ok.values()),
        "coverage": coverage_distance <= order.coverage_radius_km,
    }
    failed = tuple(name for name, ok in checks.items() if not ok)
    return ProbeReport(
        fronthaul_latency_ms=fronthaul.latency_ms,
        midhaul_latency_ms=midhaul.latency_ms,
        end_to_end_latency_ms=end_to_end.latency_ms,
        fronthaul_bandwidth_mbps=fronthaul.bandwidth_mbps,
        capacity_ok=capacity_ok,
        coverage_distance_km=coverage_distance,
        passed=not failed,
        failed_checks=failed,
    )


def _clamp01(value: float) -> float:
    return max(0.0, min(1.0, value))


def score_chain(
    chain: ChainCandidate,
    probe: ProbeReport,
    order: ServiceOrder,
    topology: Topology,
) -> float:
    """Score a passing chain in [0, 1]; higher means more slack everywhere.

    Weighted sum of four slack terms: latency slack (mean over the three
    segments of the fraction of budget left), bandwidth slack over the
    fronthaul minimum, post-reservation free-CPU fraction averaged over
    the three hosting nodes, and antenna proximity to the coverage center.
    """
    if not probe.passed:
        raise ScoringError(f"cannot score failed probe (failed: {probe.failed_checks})")
    c = order.constraints

    latency_slack = (
        _clamp01(
            (c.fronthaul_latency_ms_max - probe.fronthaul_latency_ms)
            / c.fronthaul_latency_ms_max
        )
        + _clamp01(
            (c.midhaul_latency_ms_max - probe.midhaul_latency_ms)
            / c.midhaul_latency_ms_max
        )
        + _clamp01(
            (c.end_to_end_latency_ms_max - probe.end_to_end_latency_ms)
            / c.end_to_end_latency_ms_max
        )
    ) / 3.0

    if probe.fronthaul_bandwidth_mbps == float("inf"):
        bandwidth_slack = 1.0
    else:
        bandwidth_slack = _clamp01(
            (probe.fronthaul_bandwidth_mbps - c.fronthaul_bandwidth_mbps_min)
            / c.fronthaul_bandwidth_mbps_min
        )

    demands = _demand_by_node(chain, order)
    fractions = []
    for node_id in (chain.cu_node_id, chain.du_node_id, chain.ru_node_id):
        node = topology.node(node_id)
        if node.cpu_capacity_millicores <= 0:
            fractions.append(0.0)
        else:
            fractions.append(
                (node.free_cpu_millicores - demands[node_id].cpu_millicores)
                / node.cpu_capacity_millicores
            )
    compute_slack = _clamp01(sum(fractions) / 3.0)

    if order.coverage_radius_km > 0:
        proximity_slack = _clamp01(
            1.0 - probe.coverage_distance_km / order.coverage_radius_km
        )
    else:
        proximity_slack = 1.0 if probe.coverage_distance_km == 0 else 0.0

    return (
        SCORE_WEIGHT_LATENCY * latency_slack
        + SCORE_WEIGHT_BANDWIDTH * bandwidth_slack
        + SCORE_WEIGHT_COMPUTE * compute_slack
        + SCORE_WEIGHT_PROXIMITY * proximity_slack
    )


def select_best(scored_chains: Iterable[ChainCandidate]) -> ChainCandidate | None:
    """Pick the max-score chain; ties go to the lexicographically smaller
    (ru, du, cu, antenna) tuple. None means no feasible chain."""
    best: ChainCandidate | None = None
    for chain in scored_chains:
        if chain.score is None:
            raise ScoringError(f"chain {chain.sort_key} is unscored")
        if (
            best is None
            or chain.score > best.score
            or (chain.score == best.score and chain.sort_key < best.sort_key)
        ):
            best = chain
    return best


def select_chain(
    order: ServiceOrder,
    entries: Iterable["ResourceCatalogEntry"],
    topology: Topology,
    *,
    enforce_tiers: bool = True,
) -> ChainCandidate | None:
    """Full placement pipeline: discover, enumerate, validate, score, select."""
    candidates = discover(order, entries, topology, enforce_tiers=enforce_tiers)
    scored = []
    for chain in enumerate_chains(candidates):
        probe = validate_chain(chain, order, topology)
        if probe.passed:
            scored.append(replace(chain, score=score_chain(chain, probe, order, topology)))
    return select_best(scored)


def oracle_select(
    order: ServiceOrder,
    topology: Topology,
    *,
    enforce_tiers: bool = True,
) -> ChainCandidate | None:
    """Brute-force reference selection for testing.

    Enumerates every (cu, du, ru, antenna) tuple straight off the topology
    (free antennas, live counters), keeps the validate_chain survivors,
    and applies the same argmax/tie-break as select_best. Intended for
    desk-scale topologies only.
    """
    best: ChainCandidate | None = None
    node_ids = sorted(topology.nodes)
    for ru_id in node_ids:
        ru = topology.node(ru_id)
        if not _tier_allows(UnitKind.RU, ru.tier, enforce_tiers):
            continue
        for serial in sorted(a.serial for a in ru.antennas if a.is_available):
            for du_id in node_ids:
                if not _tier_allows(UnitKind.DU, topology.node(du_id).tier, enforce_tiers):
                    continue
                for cu_id in node_ids:
                    if not _tier_allows(
                        UnitKind.CU, topology.node(cu_id).tier, enforce_tiers
                    ):
                        continue
                    chain = ChainCandidate(cu_id, du_id, ru_id, serial)
                    probe = validate_chain(chain, order, topology)
                    if not probe.passed:
                        continue
                    scored = replace(
                        chain, score=score_chain(chain, probe, order, topology)
                    )
                    if (
                        best is None
                        or scored.score > best.score
                        or (scored.score == best.score and scored.sort_key < best.sort_key)
                    ):
                        best = scored
    return best
