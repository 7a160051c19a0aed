"""End-to-end guarantees of the commissioning control plane.

Each test prints one ``[PASS]``/``[FAIL]`` line naming the guarantee it
verifies, so a full run doubles as a checklist:

1. oracle equivalence     - pipeline selection matches an exhaustive
                            reference search on randomized topologies
2. constraint soundness   - no Running chain violates latency,
                            bandwidth, capacity, or coverage limits
3. abort semantics        - infeasible orders abort with zero net
                            change to resources and leases
4. affiliation completeness - every Running chain is fully cross-wired
                            (IPs and radio serial)
5. conservation           - deploy then teardown restores the resource
                            catalog byte-identically
6. antenna exclusivity    - concurrent contention for one antenna
                            yields exactly one winner, every time
7. pipeline ordering      - event logs list the commissioning steps in
                            exact order
8. timing consistency     - sub-second deployments with per-step KPI
                            durations that sum to the total
"""

from __future__ import annotations

import json
import math
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

import networkx as nx
import pytest

from ztc.api_service import ZtcService
from ztc.bcr_agents import BcrController
from ztc.catalogs import DeploymentCatalog, ResourceCatalog
from ztc.clock import VirtualClock
from ztc.deployment_engine import DeploymentEngine
from ztc.lifecycle import LifecycleState
from ztc.placement import UnitKind, oracle_select, parse_service_order
from ztc.substrate import topology_from_dict
from conftest import (
    fixture_order_doc,
    fixture_topology_doc,
    random_order_doc,
    random_topology_doc,
)


@contextmanager
def criterion(capsys, name: str):
    """Print a single checklist line for the enclosed assertions."""
    try:
        yield
    except BaseException:
        with capsys.disabled():
            print(f"\n[FAIL] {name}")
        raise
    with capsys.disabled():
        print(f"\n[PASS] {name}")


def make_engine(topology, enforce_tiers=True):
    clock = VirtualClock(start=1000.0, tick=0.001)
    return DeploymentEngine(
        topology=topology,
        clock=clock,
        resource_catalog=ResourceCatalog(clock),
        deployment_catalog=DeploymentCatalog(),
        controller=BcrController(clock),
        enforce_tiers=enforce_tiers,
    )


def random_case(seed: int):
    """One reproducible topology/order pair."""
    rng = random.Random(seed)
    topology_doc = random_topology_doc(rng)
    order_doc = random_order_doc(rng, topology_doc)
    return topology_doc, order_doc


def run_random_pipeline(seed: int):
    """Deploy one random order; returns (engine, topology, order, record)."""
    topology_doc, order_doc = random_case(seed)
    topology = topology_from_dict(topology_doc)
    order = parse_service_order(order_doc)
    engine = make_engine(topology)
    record = engine.submit_order(order)
    return engine, topology, order, record


def collect_running(count: int, start_seed: int):
    """Random Running deployments, one per fresh topology."""
    results = []
    seed = start_seed
    while len(results) < count:
        engine, topology, order, record = run_random_pipeline(seed)
        if record.lifecycle is LifecycleState.RUNNING:
            results.append((engine, topology, order, record))
        seed += 1
    return results


def haversine_km(lat1, lon1, lat2, lon2):
    """Great-circle distance, written out independently of the library."""
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlam = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2 * 6371.0 * math.asin(math.sqrt(a))


def reference_path(topology_doc, a, b):
    """(latency, bottleneck bandwidth) of the widest-shortest path,
    recomputed with networkx rather than the library's own search."""
    if a == b:
        return 0.0, math.inf
    graph = nx.Graph()
    for node in topology_doc["nodes"]:
        graph.add_node(node["id"])
    for link in topology_doc["links"]:
        graph.add_edge(
            link["a"], link["b"], latency=link["latencyMs"], bw=link["bandwidthMbps"]
        )
    if not nx.has_path(graph, a, b):
        return math.inf, 0.0
    latency = nx.shortest_path_length(graph, a, b, weight="latency")
    best_bw = 0.0
    for path in nx.all_shortest_paths(graph, a, b, weight="latency"):
        bottleneck = min(
            graph[u][v]["bw"] for u, v in zip(path, path[1:])
        )
        best_bw = max(best_bw, bottleneck)
    return latency, best_bw


class TestOracleEquivalence:
    def test_pipeline_matches_reference_selection(self, capsys):
        with criterion(capsys, "oracle equivalence: pipeline matches reference on 220 random cases"):
            started = time.perf_counter()
            feasible = infeasible = 0
            for seed in range(5000, 5220):
                topology_doc, order_doc = random_case(seed)
                expected = oracle_select(
                    parse_service_order(order_doc), topology_from_dict(topology_doc)
                )
                engine, _, _, record = run_random_pipeline(seed)
                if expected is None:
                    assert record.lifecycle is LifecycleState.ABORTED, seed
                    assert record.abort_reason.startswith("infeasible"), seed
                    infeasible += 1
                else:
                    assert record.lifecycle is LifecycleState.RUNNING, seed
                    assert record.chain.sort_key == expected.sort_key, seed
                    assert record.chain.score == pytest.approx(expected.score, abs=1e-12)
                    feasible += 1
            elapsed = time.perf_counter() - started
            assert feasible + infeasible == 220
            assert feasible >= 15, f"only {feasible} feasible cases; generator drifted"
            assert infeasible >= 15
            assert elapsed < 30.0, f"equivalence sweep took {elapsed:.1f}s"


class TestConstraintSoundness:
    def test_running_deployments_respect_every_budget(self, capsys):
        with criterion(capsys, "constraint soundness: every Running chain honors all budgets"):
            checked = 0
            seed = 9000
            while checked < 25:
                topology_doc, order_doc = random_case(seed)
                engine, topology, order, record = run_random_pipeline(seed)
                seed += 1
                if record.lifecycle is not LifecycleState.RUNNING:
                    continue
                checked += 1
                chain = record.chain
                budgets = order.constraints

                fh_latency, fh_bw = reference_path(
                    topology_doc, chain.ru_node_id, chain.du_node_id
                )
                mh_latency, _ = reference_path(
                    topology_doc, chain.du_node_id, chain.cu_node_id
                )
                e2e_latency, _ = reference_path(
                    topology_doc, chain.ru_node_id, chain.cu_node_id
                )
                assert fh_latency <= budgets.fronthaul_latency_ms_max
                assert mh_latency <= budgets.midhaul_latency_ms_max
                assert e2e_latency <= budgets.end_to_end_latency_ms_max
                assert fh_bw >= budgets.fronthaul_bandwidth_mbps_min

                # Capacity: reservations on every node stay within it.
                for node_doc in topology_doc["nodes"]:
                    node = topology.node(node_doc["id"])
                    assert node.cpu_used_millicores <= node.cpu_capacity_millicores
                    assert node.ram_used_mb <= node.ram_capacity_mb
                    assert node.disk_used_mb <= node.disk_capacity_mb

                # The units' own demands are what is booked.
                booked = {}
                for kind, unit in record.units.items():
                    demand = budgets.demand(kind)
                    totals = booked.setdefault(unit.node_id, [0, 0, 0])
                    totals[0] += demand.cpu_millicores
                    totals[1] += demand.ram_mb
                    totals[2] += demand.disk_mb
                for node_id, (cpu, ram, disk) in booked.items():
                    node = topology.node(node_id)
                    assert node.cpu_used_millicores == cpu
                    assert node.ram_used_mb == ram
                    assert node.disk_used_mb == disk

                # Selected antenna lies inside the requested coverage disc.
                _, antenna = topology.find_antenna(chain.antenna_serial)
                distance = haversine_km(
                    order.coverage_center.latitude_deg,
                    order.coverage_center.longitude_deg,
                    antenna.position.latitude_deg,
                    antenna.position.longitude_deg,
                )
                assert distance <= order.coverage_radius_km + 1e-9
            assert checked == 25


class TestAbortSemantics:
    def test_no_antenna_order_aborts_cleanly(self, capsys):
        with criterion(capsys, "abort semantics: infeasible order leaves zero net change"):
            doc = fixture_topology_doc()
            for node in doc["nodes"]:
                node["antennas"] = []
            topology = topology_from_dict(doc)
            engine = make_engine(topology)
            baseline_entries = [
                e.to_dict() for e in engine.resource_catalog.refresh(topology)
            ]

            record = engine.submit_order(parse_service_order(fixture_order_doc()))
            assert record.lifecycle is LifecycleState.ABORTED
            assert record.abort_reason.startswith("infeasible")
            assert record.units == {}
            assert engine.ip_pool.leases() == {}
            assert [e.to_dict() for e in engine.resource_catalog.entries()] == baseline_entries
            for node in topology.nodes.values():
                assert node.cpu_used_millicores == 0
                assert node.ram_used_mb == 0
                assert node.disk_used_mb == 0

    def test_abort_when_all_antennas_occupied(self, capsys):
        with criterion(capsys, "abort semantics: occupied antennas leave no residue either"):
            topology = topology_from_dict(fixture_topology_doc())
            engine = make_engine(topology)
            order = parse_service_order(fixture_order_doc())
            for _ in range(2):
                assert engine.submit_order(order).lifecycle is LifecycleState.RUNNING

            entries_before = [e.to_dict() for e in engine.resource_catalog.entries()]
            usage_before = {
                n: topology.node(n).cpu_used_millicores for n in topology.nodes
            }
            leases_before = dict(engine.ip_pool.leases())

            third = engine.submit_order(order)
            assert third.lifecycle is LifecycleState.ABORTED
            assert [e.to_dict() for e in engine.resource_catalog.entries()] == entries_before
            assert {
                n: topology.node(n).cpu_used_millicores for n in topology.nodes
            } == usage_before
            assert dict(engine.ip_pool.leases()) == leases_before


class TestAffiliationCompleteness:
    def test_every_running_chain_is_cross_wired(self, capsys):
        with criterion(capsys, "affiliation completeness: IPs and radio serial cross-wired"):
            cases = collect_running(15, start_seed=11000)
            cases.append(self._fixture_case())
            for engine, _, _, record in cases:
                units = record.units
                cu_conf = engine.controller.agent(record.deployment_id, UnitKind.CU).config
                du_conf = engine.controller.agent(record.deployment_id, UnitKind.DU).config
                ru_conf = engine.controller.agent(record.deployment_id, UnitKind.RU).config
                assert ru_conf["duIp"] == units[UnitKind.DU].ip_address
                assert du_conf["ruIp"] == units[UnitKind.RU].ip_address
                assert du_conf["cuIp"] == units[UnitKind.CU].ip_address
                assert cu_conf["duIp"] == units[UnitKind.DU].ip_address
                serial = units[UnitKind.RU].antenna_serial
                assert ru_conf["sdr_addrs"] == f"serial={serial}"

    @staticmethod
    def _fixture_case():
        topology = topology_from_dict(fixture_topology_doc())
        engine = make_engine(topology)
        order = parse_service_order(fixture_order_doc())
        record = engine.submit_order(order)
        assert record.lifecycle is LifecycleState.RUNNING
        return engine, topology, order, record


class TestConservation:
    def test_deploy_teardown_restores_catalog_bytes(self, capsys):
        with criterion(capsys, "conservation: teardown restores the resource catalog byte-identically"):
            topology = topology_from_dict(fixture_topology_doc())
            engine = make_engine(topology)
            baseline = json.dumps(
                [e.to_dict() for e in engine.resource_catalog.refresh(topology)],
                sort_keys=True,
            ).encode()

            record = engine.submit_order(parse_service_order(fixture_order_doc()))
            assert record.lifecycle is LifecycleState.RUNNING
            during = json.dumps(
                [e.to_dict() for e in engine.resource_catalog.entries()], sort_keys=True
            ).encode()
            assert during != baseline

            engine.teardown(record.deployment_id)
            restored = json.dumps(
                [e.to_dict() for e in engine.resource_catalog.entries()], sort_keys=True
            ).encode()
            assert restored == baseline

    def test_conservation_on_random_topologies(self, capsys):
        with criterion(capsys, "conservation: holds across random topologies too"):
            for engine, topology, _, record in collect_running(10, start_seed=13000):
                engine.teardown(record.deployment_id)
                for node in topology.nodes.values():
                    assert node.cpu_used_millicores == 0
                    assert node.ram_used_mb == 0
                    assert node.disk_used_mb == 0
                    for antenna in node.antennas:
                        assert antenna.occupied_by is None
                assert engine.ip_pool.leases() == {}


class TestAntennaExclusivity:
    def test_concurrent_contention_has_exactly_one_winner(self, capsys):
        with criterion(capsys, "antenna exclusivity: one winner per contested antenna, 100 rounds"):
            contenders = 4
            doc = fixture_topology_doc()
            for node in doc["nodes"]:
                if node["id"] == "fe-1":
                    node["antennas"] = node["antennas"][:1]
            order_doc = fixture_order_doc()

            for round_number in range(100):
                topology = topology_from_dict(doc)
                engine = make_engine(topology)
                order = parse_service_order(order_doc)
                with ThreadPoolExecutor(max_workers=contenders) as pool:
                    records = list(
                        pool.map(lambda _: engine.submit_order(order), range(contenders))
                    )
                states = sorted((r.lifecycle for r in records), key=lambda s: s.value)
                winners = [r for r in records if r.lifecycle is LifecycleState.RUNNING]
                losers = [r for r in records if r.lifecycle is LifecycleState.ABORTED]
                assert len(winners) == 1, f"round {round_number}: {states}"
                assert len(losers) == contenders - 1
                antenna = topology.node("fe-1").antenna("ant-001")
                assert antenna.occupied_by == winners[0].deployment_id
                for loser in losers:
                    assert loser.units == {}


class TestPipelineOrdering:
    REQUIRED_ORDER = [
        "discover",
        "score_chains",
        "render_manifests",
        "create_units",
        "record_deployment",
        "affiliate_units",
        "start_units",
    ]

    def test_event_logs_keep_commissioning_order(self, capsys):
        with criterion(capsys, "pipeline ordering: discovery before scoring before wiring, always"):
            records = [r for _, _, _, r in collect_running(12, start_seed=17000)]
            topology = topology_from_dict(fixture_topology_doc())
            engine = make_engine(topology)
            records.append(engine.submit_order(parse_service_order(fixture_order_doc())))
            # An aborted record must keep the same prefix discipline.
            doc = fixture_order_doc(coverageCenter={"lat": 0.0, "lon": 0.0})
            records.append(engine.submit_order(parse_service_order(doc)))

            for record in records:
                steps = [e.step for e in record.event_log]
                present = [s for s in self.REQUIRED_ORDER if s in steps]
                indexes = [steps.index(s) for s in present]
                assert indexes == sorted(indexes), record.deployment_id
                if record.lifecycle is LifecycleState.RUNNING:
                    assert present == self.REQUIRED_ORDER


class TestTimingConsistency:
    def test_sub_second_wall_time_and_consistent_kpis(self, capsys):
        with criterion(capsys, "timing consistency: <1s per deployment, step sums equal totals"):
            topology = topology_from_dict(fixture_topology_doc())
            service = ZtcService(topology)
            for _ in range(5):
                started = time.perf_counter()
                record = service.submit_order(fixture_order_doc())
                wall = time.perf_counter() - started
                assert record.lifecycle is LifecycleState.RUNNING
                assert wall < 1.0, f"deployment took {wall:.3f}s"

                report = service.kpi(record.deployment_id)
                total = report.deployment_duration_ms
                step_sum = sum(report.per_step_durations_ms.values())
                assert abs(step_sum - total) <= 1.0, (step_sum, total)
                timeline = report.timeline.to_dict()
                assert (
                    timeline["tZtcDeployStart"]
                    < timeline["tZtcRunning"]
                    < timeline["tRanDeployStart"]
                    < timeline["tRanRunning"]
                )
                service.delete_deployment(record.deployment_id)
