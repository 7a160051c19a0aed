"""Command line front ends: serve, order, oracle, scenario.

Configuration precedence everywhere: explicit flag, then environment
variable (ZTC_PORT, ZTC_TOPOLOGY, ZTC_DATA_DIR), then built-in default.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .api_service import DEFAULT_PORT, ZtcService, create_app
from .placement import oracle_select, parse_service_order
from .substrate import load_topology

ENV_PORT = "ZTC_PORT"
ENV_TOPOLOGY = "ZTC_TOPOLOGY"
ENV_DATA_DIR = "ZTC_DATA_DIR"
DEFAULT_DATA_DIR = "./data"


def _resolve(flag_value, env_name: str, default):
    if flag_value is not None:
        return flag_value
    env_value = os.environ.get(env_name)
    if env_value is not None:
        return env_value
    return default


def _resolve_topology_path(flag_value: str | None) -> Path:
    value = _resolve(flag_value, ENV_TOPOLOGY, None)
    if value is None:
        raise SystemExit(f"a topology file is required (--topology or {ENV_TOPOLOGY})")
    return Path(value)


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    topology = load_topology(_resolve_topology_path(args.topology))
    port = int(_resolve(args.port, ENV_PORT, DEFAULT_PORT))
    data_dir = Path(_resolve(args.data_dir, ENV_DATA_DIR, DEFAULT_DATA_DIR))
    service = ZtcService(
        topology,
        data_dir=data_dir,
        enforce_tiers=not args.allow_any_tier,
        sample_interval_s=args.sample_interval,
        unit_start_delay_s=args.unit_start_delay,
    )
    service.start_sampler()
    try:
        uvicorn.run(create_app(service), host=args.host, port=port, log_level="warning")
    finally:
        service.stop_sampler()
    return 0


def cmd_order(args: argparse.Namespace) -> int:
    import httpx

    body = Path(args.file).read_text(encoding="utf-8")
    params = {"sync": "true"} if args.sync else None
    response = httpx.post(
        f"{args.url.rstrip('/')}/api/orders",
        params=params,
        content=body,
        headers={"content-type": "application/json"},
        timeout=60.0,
    )
    print(json.dumps(response.json(), indent=2, sort_keys=True))
    return 0 if response.is_success else 1


def cmd_oracle(args: argparse.Namespace) -> int:
    topology = load_topology(_resolve_topology_path(args.topology))
    order_doc = json.loads(Path(args.order).read_text(encoding="utf-8"))
    order = parse_service_order(order_doc)
    selected = oracle_select(order, topology, enforce_tiers=not args.allow_any_tier)
    print(json.dumps({"selected": selected.to_dict() if selected else None}, indent=2))
    return 0 if selected is not None else 1


def cmd_scenario(args: argparse.Namespace) -> int:
    """Replay a scripted sequence of orders and teardowns in-process."""
    script_path = Path(args.file)
    script = json.loads(script_path.read_text(encoding="utf-8"))
    topology_ref = script.get("topology") or _resolve(args.topology, ENV_TOPOLOGY, None)
    if topology_ref is None:
        raise SystemExit("scenario needs a topology (script key or --topology)")
    topology_path = Path(topology_ref)
    if not topology_path.is_absolute():
        topology_path = script_path.parent / topology_path
    service = ZtcService(load_topology(topology_path), enforce_tiers=not args.allow_any_tier)

    for index, step in enumerate(script.get("steps", []), start=1):
        action = step.get("action")
        if action == "order":
            order_doc = step["order"]
            if isinstance(order_doc, str):
                order_doc = json.loads((script_path.parent / order_doc).read_text("utf-8"))
            record = service.submit_order(parse_service_order(order_doc), sync=True)
            result = {
                "step": index,
                "action": action,
                "deploymentId": record.deployment_id,
                "lifecycle": record.lifecycle.value,
                "abortReason": record.abort_reason,
            }
        elif action == "teardown":
            record = service.delete_deployment(step["deploymentId"])
            result = {
                "step": index,
                "action": action,
                "deploymentId": record.deployment_id,
                "lifecycle": record.lifecycle.value,
            }
        elif action == "sample":
            result = {"step": index, "action": action, "samples": len(service.sample_usage())}
        else:
            raise SystemExit(f"step {index}: unknown action {action!r}")
        print(json.dumps(result, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ztc", description="RAN commissioning control plane")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the REST API server")
    serve.add_argument("--topology", help=f"topology JSON file (env {ENV_TOPOLOGY})")
    serve.add_argument("--port", type=int, help=f"listen port (env {ENV_PORT}, default {DEFAULT_PORT})")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--data-dir", help=f"snapshot directory (env {ENV_DATA_DIR}, default {DEFAULT_DATA_DIR})")
    serve.add_argument("--allow-any-tier", action="store_true", help="relax tier placement rules")
    serve.add_argument("--sample-interval", type=float, default=1.0, help="usage sampling period in seconds")
    serve.add_argument(
        "--unit-start-delay",
        type=float,
        default=0.0,
        help="simulated container start latency per unit in seconds",
    )
    serve.set_defaults(handler=cmd_serve)

    order = sub.add_parser("order", help="submit an order to a running server")
    order.add_argument("--file", required=True, help="order JSON file")
    order.add_argument("--sync", action="store_true", help="wait for the pipeline to finish")
    order.add_argument("--url", default=f"http://127.0.0.1:{DEFAULT_PORT}")
    order.set_defaults(handler=cmd_order)

    oracle = sub.add_parser("oracle", help="print the reference chain selection for an order")
    oracle.add_argument("--topology", help=f"topology JSON file (env {ENV_TOPOLOGY})")
    oracle.add_argument("--order", required=True, help="order JSON file")
    oracle.add_argument("--allow-any-tier", action="store_true")
    oracle.set_defaults(handler=cmd_oracle)

    scenario = sub.add_parser("scenario", help="replay a scripted order/teardown sequence")
    scenario.add_argument("--file", required=True, help="scenario JSON script")
    scenario.add_argument("--topology", help="topology override when the script names none")
    scenario.add_argument("--allow-any-tier", action="store_true")
    scenario.set_defaults(handler=cmd_scenario)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
