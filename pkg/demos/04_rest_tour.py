#!/usr/bin/env python3
"""Drive the control plane purely through its REST API.

Boots the HTTP server on a background thread, then acts as an outside
operator would: inspect the substrate, submit an order, watch the
event stream, read the KPI report, and delete the deployment. This is
exactly the surface a management console consumes.

Run from the repository root:

    python3 demos/04_rest_tour.py
"""

import json
import threading
import time
from pathlib import Path

import httpx
import uvicorn

from ztc import ZtcService, create_app, load_topology

DATA = Path(__file__).parent / "data"
PORT = 8431


def start_server(service: ZtcService) -> uvicorn.Server:
    config = uvicorn.Config(create_app(service), host="127.0.0.1", port=PORT, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    while not server.started:
        time.sleep(0.01)
    return server


def main() -> None:
    service = ZtcService(load_topology(DATA / "topology.json"))
    server = start_server(service)
    base = f"http://127.0.0.1:{PORT}"
    try:
        nodes = httpx.get(f"{base}/api/nodes").json()["nodes"]
        print("substrate nodes:")
        for node in nodes:
            free = sum(1 for a in node["antennas"] if a["occupiedBy"] is None)
            print(f"  {node['nodeId']:>16} [{node['tier']}] antennas free: {free}/{len(node['antennas'])}")

        order = json.loads((DATA / "order_lyon_south.json").read_text())
        created = httpx.post(f"{base}/api/orders?sync=true", json=order).json()
        deployment_id = created["deploymentId"]
        print(f"\nPOST /api/orders -> {deployment_id} {created['lifecycle']}")

        detail = httpx.get(f"{base}/api/deployments/{deployment_id}").json()
        print("units:")
        for kind, unit in detail["units"].items():
            print(f"  {kind}: node={unit['nodeId']} ip={unit['ipAddress']} state={unit['state']}")
        print(f"KPI total: {detail['kpi']['deploymentDurationMs']:.1f} ms")

        events = httpx.get(f"{base}/api/events", params={"since": 0}).json()["events"]
        steps = [e["step"] for e in events if e["deploymentId"] == deployment_id]
        print(f"event stream for {deployment_id}: {' > '.join(steps)}")

        gone = httpx.delete(f"{base}/api/deployments/{deployment_id}").json()
        print(f"\nDELETE -> {gone['lifecycle']}")
        lyon = httpx.get(f"{base}/api/nodes/fe-lyon-gerland").json()
        free = sum(1 for a in lyon["antennas"] if a["occupiedBy"] is None)
        print(f"fe-lyon-gerland antennas free again: {free}/{len(lyon['antennas'])}")
    finally:
        server.should_exit = True
        time.sleep(0.1)


if __name__ == "__main__":
    main()
