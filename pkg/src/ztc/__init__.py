"""Zero-touch commissioning of split Cloud-RAN chains on a simulated
three-tier edge substrate: placement, deployment pipeline, agent
configuration protocol, and a REST control-plane API."""

from .api_service import KpiReport, UsageSample, ZtcService, build_kpi_report, create_app
from .bcr_agents import (
    AgentMessage,
    AgentProtocolError,
    BcrController,
    MessageKind,
    StatusReport,
    UnitAgent,
)
from .catalogs import (
    DeploymentCatalog,
    DeploymentRecord,
    EventLogEntry,
    ResourceCatalog,
    ResourceCatalogEntry,
    UnitRecord,
    UnitState,
)
from .clock import Clock, MonotonicClock, VirtualClock
from .deployment_engine import (
    DeploymentEngine,
    IpPool,
    KpiTimeline,
    Manifest,
    render_manifests,
    unit_config,
)
from .lifecycle import LifecycleState
from .placement import (
    ChainCandidate,
    PlacementConstraints,
    ProbeReport,
    ServiceOrder,
    UnitKind,
    discover,
    enumerate_chains,
    oracle_select,
    parse_service_order,
    score_chain,
    select_best,
    select_chain,
    validate_chain,
)
from .substrate import (
    Antenna,
    CloudTier,
    GeoPosition,
    Link,
    Node,
    PathMetrics,
    ResourceDemand,
    Topology,
    geo_distance_km,
    load_topology,
    parse_topology,
    topology_from_dict,
)

__version__ = "0.1.0"

__all__ = [
    "AgentMessage",
    "AgentProtocolError",
    "Antenna",
    "BcrController",
    "ChainCandidate",
    "Clock",
    "CloudTier",
    "DeploymentCatalog",
    "DeploymentEngine",
    "DeploymentRecord",
    "EventLogEntry",
    "GeoPosition",
    "IpPool",
    "KpiReport",
    "KpiTimeline",
    "LifecycleState",
    "Link",
    "Manifest",
    "MessageKind",
    "MonotonicClock",
    "Node",
    "PathMetrics",
    "PlacementConstraints",
    "ProbeReport",
    "ResourceCatalog",
    "ResourceCatalogEntry",
    "ResourceDemand",
    "ServiceOrder",
    "StatusReport",
    "Topology",
    "UnitAgent",
    "UnitKind",
    "UnitRecord",
    "UnitState",
    "UsageSample",
    "VirtualClock",
    "ZtcService",
    "build_kpi_report",
    "create_app",
    "discover",
    "enumerate_chains",
    "geo_distance_km",
    "load_topology",
    "oracle_select",
    "parse_service_order",
    "parse_topology",
    "render_manifests",
    "score_chain",
    "select_best",
    "select_chain",
    "topology_from_dict",
    "unit_config",
    "validate_chain",
]
