#!/usr/bin/env python3
"""Commission one Cloud-RAN chain, end to end, and narrate every step.

A service order asks for coverage around a tower southwest of Paris.
The control plane discovers candidate nodes tier by tier, enumerates
CU/DU/RU chains, validates them against the latency, bandwidth,
capacity, and coverage budgets, scores the survivors, and deploys the
winner: three units created, addressed, cross-wired, and started.

Run from the repository root:

    python3 demos/01_commission_a_chain.py
"""

import json
from pathlib import Path

from ztc import (
    ResourceCatalog,
    UnitKind,
    VirtualClock,
    ZtcService,
    discover,
    enumerate_chains,
    load_topology,
    parse_service_order,
    score_chain,
    validate_chain,
)

DATA = Path(__file__).parent / "data"


def main() -> None:
    topology = load_topology(DATA / "topology.json")
    order = parse_service_order(json.loads((DATA / "order_tower_pilot.json").read_text()))

    print(f"order {order.tag!r}: {order.max_users} users within "
          f"{order.coverage_radius_km:g} km of "
          f"({order.coverage_center.latitude_deg}, {order.coverage_center.longitude_deg})")
    print(f"budgets: fronthaul <= {order.constraints.fronthaul_latency_ms_max:g} ms, "
          f"midhaul <= {order.constraints.midhaul_latency_ms_max:g} ms, "
          f"end-to-end <= {order.constraints.end_to_end_latency_ms_max:g} ms, "
          f"fronthaul bandwidth >= {order.constraints.fronthaul_bandwidth_mbps_min:g} Mbps")

    # Step 1: discovery reads the resource catalog, not the topology
    # directly: which nodes can host which unit, and which antennas
    # fall inside the requested coverage disc?
    clock = VirtualClock(start=0.0, tick=0.001)
    catalog = ResourceCatalog(clock)
    entries = catalog.refresh(topology)
    candidates = discover(order, entries, topology)
    print("\ndiscovery:")
    print(f"  CU candidates: {', '.join(candidates.cu_nodes) or '(none)'}")
    print(f"  DU candidates: {', '.join(candidates.du_nodes) or '(none)'}")
    print(f"  RU candidates: {', '.join(candidates.ru_nodes) or '(none)'}")
    for ru_node, serials in candidates.antennas_by_ru_node.items():
        print(f"  antennas in coverage at {ru_node}: {', '.join(serials)}")

    # Steps 2-3: enumerate every chain and probe it against the budgets.
    chains = enumerate_chains(candidates)
    print(f"\n{len(chains)} chains enumerated; validation results:")
    scored = []
    for chain in chains:
        probe = validate_chain(chain, order, topology)
        label = f"CU={chain.cu_node_id} DU={chain.du_node_id} RU={chain.ru_node_id} ant={chain.antenna_serial}"
        if probe.passed:
            value = score_chain(chain, probe, order, topology)
            scored.append((value, label))
            print(f"  ok    {label}  score={value:.4f}")
        else:
            print(f"  drop  {label}  fails {', '.join(probe.failed_checks)}")

    scored.sort(reverse=True)
    print(f"\nbest chain by score: {scored[0][1]}")

    # Step 4: hand the same order to the full pipeline.
    service = ZtcService(topology, clock=clock)
    record = service.submit_order(json.loads((DATA / "order_tower_pilot.json").read_text()))
    print(f"\npipeline result: {record.deployment_id} is {record.lifecycle.value}")
    for entry in record.event_log:
        detail = f"  ({entry.detail})" if entry.detail else ""
        print(f"  t={entry.timestamp:7.3f}  {entry.step}{detail}")

    print("\nunits and wiring:")
    for kind, unit in record.units.items():
        agent = service.controller.agent(record.deployment_id, kind)
        peers = {k: v for k, v in agent.config.items() if k.endswith("Ip") or k == "sdr_addrs"}
        print(f"  {kind.value}: node={unit.node_id} ip={unit.ip_address} "
              f"state={unit.state.value} peers={peers}")

    report = service.kpi(record.deployment_id)
    print(f"\ndeployment took {report.deployment_duration_ms:.0f} ms of simulated time")


if __name__ == "__main__":
    main()
