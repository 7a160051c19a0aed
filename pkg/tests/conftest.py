"""Shared fixtures: a small deterministic topology, a placeable order,
and randomized topology/order generators for oracle-equivalence and
soundness testing."""

from __future__ import annotations

import random

import pytest

from ztc import ServiceOrder, Topology, ZtcService, parse_service_order, topology_from_dict
from ztc.clock import VirtualClock


def fixture_topology_doc() -> dict:
    """One node per tier on a straight west-east line in Brittany; the
    far-edge node carries two antennas, one exactly at (48, -2)."""
    return {
        "nodes": [
            {
                "id": "reg-1",
                "tier": "Regional",
                "position": {"lat": 48.0, "lon": -3.0},
                "cpuMillicores": 8000,
                "ramMb": 16384,
                "diskMb": 65536,
                "antennas": [],
            },
            {
                "id": "edge-1",
                "tier": "Edge",
                "position": {"lat": 48.0, "lon": -2.5},
                "cpuMillicores": 4000,
                "ramMb": 8192,
                "diskMb": 32768,
                "antennas": [],
            },
            {
                "id": "fe-1",
                "tier": "FarEdge",
                "position": {"lat": 48.0, "lon": -2.0},
                "cpuMillicores": 2000,
                "ramMb": 4096,
                "diskMb": 16384,
                "antennas": [
                    {"serial": "ant-001", "position": {"lat": 48.0, "lon": -2.0}},
                    {"serial": "ant-002", "position": {"lat": 48.01, "lon": -2.0}},
                ],
            },
        ],
        "links": [
            {"a": "reg-1", "b": "edge-1", "latencyMs": 2.0, "bandwidthMbps": 50000},
            {"a": "edge-1", "b": "fe-1", "latencyMs": 0.3, "bandwidthMbps": 25000},
        ],
    }


def fixture_order_doc(**overrides) -> dict:
    """Order placeable on the fixture topology. The end-to-end budget is
    widened to 10 ms because the fixture's RU-CU path costs 2.3 ms."""
    doc = {
        "tag": "pilot",
        "coverageCenter": {"lat": 48.0, "lon": -2.0},
        "coverageRadiusKm": 5.0,
        "maxUsers": 32,
        "constraints": {"endToEndLatencyMsMax": 10.0},
    }
    doc.update(overrides)
    return doc


@pytest.fixture
def topology_doc() -> dict:
    return fixture_topology_doc()


@pytest.fixture
def topology(topology_doc) -> Topology:
    return topology_from_dict(topology_doc)


@pytest.fixture
def order() -> ServiceOrder:
    return parse_service_order(fixture_order_doc())


@pytest.fixture
def clock() -> VirtualClock:
    return VirtualClock(start=1_000.0, tick=0.001)


@pytest.fixture
def service(topology, clock) -> ZtcService:
    return ZtcService(topology, clock=clock)


TIERS = ("Regional", "Edge", "FarEdge")


def random_topology_doc(rng: random.Random, max_nodes: int = 8, max_antennas: int = 4) -> dict:
    """Desk-scale random topology. Feasibility is deliberately not
    guaranteed: tiers, capacities, antenna placement and connectivity all
    vary, and with small probability the graph is left disconnected."""
    n_nodes = rng.randint(3, max_nodes)
    nodes = []
    antenna_budget = rng.randint(0, max_antennas)
    serial_counter = 0
    for i in range(n_nodes):
        if i < 3:
            tier = TIERS[i]
        else:
            tier = rng.choice(TIERS)
        lat = rng.uniform(47.5, 48.5)
        lon = rng.uniform(-3.5, -1.5)
        antennas = []
        if antenna_budget > 0 and tier == "FarEdge" and rng.random() < 0.85:
            count = rng.randint(1, antenna_budget)
            antenna_budget -= count
            for _ in range(count):
                serial_counter += 1
                antennas.append(
                    {
                        "serial": f"ant-{serial_counter:03d}",
                        "position": {
                            "lat": lat + rng.uniform(-0.05, 0.05),
                            "lon": lon + rng.uniform(-0.05, 0.05),
                        },
                    }
                )
        nodes.append(
            {
                "id": f"n-{i}",
                "tier": tier,
                "position": {"lat": lat, "lon": lon},
                "cpuMillicores": rng.choice([400, 2000, 2000, 4000, 4000, 8000, 8000]),
                "ramMb": rng.choice([512, 4096, 4096, 16384, 16384]),
                "diskMb": rng.choice([1024, 8192, 8192, 65536, 65536]),
                "antennas": antennas,
            }
        )
    links = []
    seen_pairs = set()
    for i in range(1, n_nodes):
        # Spanning edge, skipped 10% of the time to produce disconnected graphs.
        if rng.random() < 0.9:
            j = rng.randrange(i)
            seen_pairs.add((j, i))
    extra = rng.randint(0, n_nodes)
    for _ in range(extra):
        i, j = rng.sample(range(n_nodes), 2)
        pair = (min(i, j), max(i, j))
        seen_pairs.add(pair)
    for i, j in sorted(seen_pairs):
        if rng.random() < 0.75:
            latency = round(rng.uniform(0.05, 0.6), 3)
        else:
            latency = round(rng.uniform(0.6, 3.0), 3)
        links.append(
            {
                "a": f"n-{i}",
                "b": f"n-{j}",
                "latencyMs": latency,
                "bandwidthMbps": rng.choice([500, 1000, 5000, 25000, 50000]),
            }
        )
    return {"nodes": nodes, "links": links}


def random_order_doc(rng: random.Random, topology_doc: dict) -> dict:
    """Random order over the given topology; centers bias toward real
    antenna positions so a healthy share of orders is feasible."""
    antenna_positions = [
        a["position"] for node in topology_doc["nodes"] for a in node["antennas"]
    ]
    if antenna_positions and rng.random() < 0.85:
        base = rng.choice(antenna_positions)
        center = {
            "lat": base["lat"] + rng.uniform(-0.01, 0.01),
            "lon": base["lon"] + rng.uniform(-0.01, 0.01),
        }
    else:
        center = {"lat": rng.uniform(47.5, 48.5), "lon": rng.uniform(-3.5, -1.5)}
    constraints = {}
    if rng.random() < 0.8:
        constraints["endToEndLatencyMsMax"] = rng.choice([2.0, 5.0, 10.0])
    if rng.random() < 0.3:
        constraints["fronthaulLatencyMsMax"] = rng.choice([0.5, 1.0, 2.0])
    if rng.random() < 0.3:
        constraints["midhaulLatencyMsMax"] = rng.choice([2.0, 5.0, 10.0])
    if rng.random() < 0.2:
        constraints["fronthaulBandwidthMbpsMin"] = rng.choice([500.0, 2000.0, 30000.0])
    doc = {
        "tag": f"order-{rng.randrange(10_000)}",
        "coverageCenter": center,
        "coverageRadiusKm": rng.choice([2.0, 5.0, 25.0, 120.0]),
        "maxUsers": rng.choice([16, 32, 64, 128]),
    }
    if constraints:
        doc["constraints"] = constraints
    return doc
