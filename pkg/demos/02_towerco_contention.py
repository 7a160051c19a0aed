#!/usr/bin/env python3
"""Several tenants race for the same tower; losers leave no residue.

The far-edge node fe-tower-a13 hosts three antennas, the classic
multi-tenant tower arrangement. Four identical orders arrive at once:
three win distinct antennas, the fourth finds no free antenna and
aborts. The point of the demo is the bookkeeping afterwards: the
aborted order must leave reservations, address leases, and the
resource catalog exactly as the three winners set them.

Run from the repository root:

    python3 demos/02_towerco_contention.py
"""

import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from ztc import LifecycleState, UnitKind, VirtualClock, ZtcService, load_topology

DATA = Path(__file__).parent / "data"


def print_tower(service, label: str) -> None:
    print(f"\nantenna occupancy {label}:")
    node = service.topology.node("fe-tower-a13")
    for antenna in node.antennas:
        holder = antenna.occupied_by or "free"
        print(f"  {antenna.serial}: {holder}")
    print(f"  node load: {node.cpu_used_millicores}/{node.cpu_capacity_millicores} millicores")


def main() -> None:
    topology = load_topology(DATA / "topology.json")
    service = ZtcService(topology, clock=VirtualClock(start=0.0, tick=0.001))
    order_doc = json.loads((DATA / "order_tower_pilot.json").read_text())
    # Shrink the radius so only the tower's own antennas qualify.
    order_doc["coverageRadiusKm"] = 2.0

    print_tower(service, "before")

    with ThreadPoolExecutor(max_workers=4) as pool:
        records = list(pool.map(lambda _: service.submit_order(dict(order_doc)), range(4)))

    print("\nfour concurrent orders:")
    for record in sorted(records, key=lambda r: r.deployment_id):
        if record.lifecycle is LifecycleState.RUNNING:
            serial = record.units[UnitKind.RU].antenna_serial
            print(f"  {record.deployment_id}: Running on antenna {serial}")
        else:
            print(f"  {record.deployment_id}: {record.lifecycle.value} ({record.abort_reason})")

    print_tower(service, "after the race")

    running = [r for r in records if r.lifecycle is LifecycleState.RUNNING]
    aborted = [r for r in records if r.lifecycle is LifecycleState.ABORTED]
    assert len(running) == 3 and len(aborted) == 1

    # The loser's rollback must be invisible: exactly three units' worth
    # of CPU booked, exactly nine addresses leased.
    leases = service.engine.ip_pool.leases()
    print(f"\naddress leases held: {len(leases)} (three per running chain)")

    # Tear one winner down; its antenna frees up for the next tenant.
    victim = running[0].deployment_id
    service.delete_deployment(victim)
    print(f"\ntore down {victim}")
    print_tower(service, "after teardown")

    retry = service.submit_order(dict(order_doc))
    print(f"\nresubmitted order: {retry.deployment_id} is {retry.lifecycle.value} "
          f"on antenna {retry.units[UnitKind.RU].antenna_serial}")


if __name__ == "__main__":
    main()
