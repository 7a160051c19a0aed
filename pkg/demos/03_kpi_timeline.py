#!/usr/bin/env python3
"""Where does commissioning time go? Watch the four KPI timestamps.

The control plane stamps four moments for every deployment:

    tZtcDeployStart  the control plane itself begins to come up
    tZtcRunning      the control plane is ready to take orders
    tRanDeployStart  a RAN order is admitted
    tRanRunning      its CU/DU/RU chain reaches Running

With the default zero-delay profile the whole pipeline is a few
simulated milliseconds. This demo switches on the slow profile
(2 s of simulated container start latency per unit) so the per-step
breakdown shows starts dominating everything else, the shape real
container platforms produce. The virtual clock means the demo itself
still finishes instantly.

Run from the repository root:

    python3 demos/03_kpi_timeline.py
"""

import json
from pathlib import Path

from ztc import VirtualClock, ZtcService, load_topology

DATA = Path(__file__).parent / "data"


def main() -> None:
    topology = load_topology(DATA / "topology.json")
    service = ZtcService(
        topology,
        clock=VirtualClock(start=0.0, tick=0.001),
        unit_start_delay_s=2.0,
    )

    record = service.submit_order(json.loads((DATA / "order_stadium_event.json").read_text()))
    report = service.kpi(record.deployment_id)

    print(f"deployment {record.deployment_id} ({record.tag}): {record.lifecycle.value}")
    print("\ntimeline (simulated seconds):")
    for name, value in report.timeline.to_dict().items():
        print(f"  {name:>16}: {value:8.3f}")

    print("\nper-step durations (ms):")
    total = 0.0
    for step, duration in report.per_step_durations_ms.items():
        bar = "#" * max(1, int(duration / 100))
        print(f"  {step:>17}: {duration:8.1f}  {bar}")
        total += duration
    print(f"  {'sum':>17}: {total:8.1f}")
    print(f"  {'reported total':>17}: {report.deployment_duration_ms:8.1f}")

    # The sum of the step durations is the total, by construction.
    assert abs(total - report.deployment_duration_ms) < 1.0

    service.delete_deployment(record.deployment_id)
    print(f"\n{record.deployment_id} deleted; "
          f"usage back to baseline: "
          f"{all(n.cpu_used_millicores == 0 for n in topology.nodes.values())}")


if __name__ == "__main__":
    main()
