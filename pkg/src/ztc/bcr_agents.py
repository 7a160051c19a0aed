"""Configuration-agent protocol between the control plane and RAN units.

A controller-side orchestrator talks to one lightweight agent per unit
(CU, DU, RU). Delivery is at-least-once: every message carries a unique
id, agents deduplicate on it, and every delivery is acknowledged. All
traffic can be traced to a per-deployment JSONL file.
"""

from __future__ import annotations

import hashlib
import json
import threading
import uuid
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping

from .catalogs import UnitRecord, UnitState
from .clock import Clock
from .placement import UnitKind

CONTROLLER_ID = "bcr-s"


class AgentError(Exception):
    """Base class for agent protocol failures."""


class AgentProtocolError(AgentError):
    """Message is not applicable in the unit's current state."""


class UnknownAgentError(AgentError):
    """No agent is registered under the requested unit id."""


class MessageKind(str, Enum):
    CONFIG_PUSH = "ConfigPush"
    AFFILIATION_INFO = "AffiliationInfo"
    START_COMMAND = "StartCommand"
    ACK = "Ack"
    STATUS_REPORT = "StatusReport"


@dataclass(frozen=True)
class AgentMessage:
    message_id: str
    kind: MessageKind
    sender: str
    recipient: str
    timestamp: float
    payload: dict

    def to_dict(self) -> dict:
        return {
            "messageId": self.message_id,
            "kind": self.kind.value,
            "sender": self.sender,
            "recipient": self.recipient,
            "timestamp": self.timestamp,
            "payload": self.payload,
        }


@dataclass(frozen=True)
class StatusReport:
    unit_id: str
    state: UnitState
    config_digest: str
    timestamp: float

    def to_dict(self) -> dict:
        return {
            "unitId": self.unit_id,
            "state": self.state.value,
            "configDigest": self.config_digest,
            "timestamp": self.timestamp,
        }


def config_digest(config: Mapping) -> str:
    canonical = json.dumps(dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def unit_id_for(deployment_id: str, kind: UnitKind) -> str:
    return f"{deployment_id}/{kind.value.lower()}"


class UnitAgent:
    """In-process stand-in for the configuration agent on one unit.

    Applies each distinct message exactly once; redeliveries are
    acknowledged without side effects.
    """

    def __init__(self, unit_id: str, kind: UnitKind, record: UnitRecord, clock: Clock):
        self.unit_id = unit_id
        self.kind = kind
        self._record = record
        self._clock = clock
        self._seen: set[str] = set()
        self._lock = threading.Lock()

    @property
    def state(self) -> UnitState:
        return self._record.state

    @property
    def config(self) -> dict:
        return dict(self._record.config)

    def handle(self, message: AgentMessage) -> AgentMessage:
        """Apply a message and return an Ack; duplicates only ack."""
        with self._lock:
            duplicate = message.message_id in self._seen
            if not duplicate:
                self._apply(message)
                self._seen.add(message.message_id)
        return AgentMessage(
            message_id=uuid.uuid4().hex,
            kind=MessageKind.ACK,
            sender=self.unit_id,
            recipient=message.sender,
            timestamp=self._clock.now(),
            payload={
                "ackFor": message.message_id,
                "duplicate": duplicate,
                "state": self._record.state.value,
            },
        )

    def _apply(self, message: AgentMessage) -> None:
        if message.kind is MessageKind.CONFIG_PUSH:
            self._record.config.update(message.payload["config"])
            if self._record.state is UnitState.CREATED:
                self._record.state = UnitState.CONFIGURED
        elif message.kind is MessageKind.AFFILIATION_INFO:
            if self._record.state is UnitState.CREATED:
                raise AgentProtocolError(f"{self.unit_id}: affiliation before configuration")
            self._record.config.update(message.payload["peers"])
            if self._record.state is UnitState.CONFIGURED:
                self._record.state = UnitState.AFFILIATED
        elif message.kind is MessageKind.START_COMMAND:
            if self._record.state not in (UnitState.AFFILIATED, UnitState.RUNNING):
                raise AgentProtocolError(
                    f"{self.unit_id}: start requires affiliation, "
                    f"state is {self._record.state.value}"
                )
            self._record.state = UnitState.RUNNING
        else:
            raise AgentProtocolError(f"{self.unit_id}: cannot handle {message.kind.value}")

    def report_status(self) -> StatusReport:
        with self._lock:
            return StatusReport(
                unit_id=self.unit_id,
                state=self._record.state,
                config_digest=config_digest(self._record.config),
                timestamp=self._clock.now(),
            )


class MessageTrace:
    """Append-only JSONL log of protocol traffic for one deployment."""

    def __init__(self, path: Path):
        self.path = path
        self._lock = threading.Lock()
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, direction: str, message: AgentMessage) -> None:
        line = json.dumps({"direction": direction, "message": message.to_dict()}, sort_keys=True)
        with self._lock:
            with self.path.open("a", encoding="utf-8") as handle:
                handle.write(line + "\n")


class BcrController:
    """Controller side of the agent protocol.

    Owns the set of live agents, addresses them by deployment and unit
    kind, and records every send and every ack in the deployment trace.
    """

    def __init__(self, clock: Clock, trace_dir: Path | None = None):
        self._clock = clock
        self._trace_dir = Path(trace_dir) if trace_dir is not None else None
        self._agents: dict[str, UnitAgent] = {}
        self._traces: dict[str, MessageTrace] = {}
        self._lock = threading.RLock()

    def spawn_agent(self, deployment_id: str, kind: UnitKind, record: UnitRecord) -> UnitAgent:
        unit_id = unit_id_for(deployment_id, kind)
        with self._lock:
            if unit_id in self._agents:
                raise AgentError(f"agent {unit_id} already exists")
            agent = UnitAgent(unit_id, kind, record, self._clock)
            self._agents[unit_id] = agent
            return agent

    def despawn_agents(self, deployment_id: str) -> None:
        prefix = f"{deployment_id}/"
        with self._lock:
            for unit_id in [u for u in self._agents if u.startswith(prefix)]:
                del self._agents[unit_id]

    def agent(self, deployment_id: str, kind: UnitKind) -> UnitAgent:
        unit_id = unit_id_for(deployment_id, kind)
        with self._lock:
            try:
                return self._agents[unit_id]
            except KeyError:
                raise UnknownAgentError(f"no agent {unit_id}") from None

    def agents_for(self, deployment_id: str) -> dict[UnitKind, UnitAgent]:
        prefix = f"{deployment_id}/"
        with self._lock:
            return {
                agent.kind: agent
                for unit_id, agent in self._agents.items()
                if unit_id.startswith(prefix)
            }

    def send(
        self,
        deployment_id: str,
        kind: UnitKind,
        message_kind: MessageKind,
        payload: dict,
    ) -> AgentMessage:
        agent = self.agent(deployment_id, kind)
        message = AgentMessage(
            message_id=uuid.uuid4().hex,
            kind=message_kind,
            sender=CONTROLLER_ID,
            recipient=agent.unit_id,
            timestamp=self._clock.now(),
            payload=payload,
        )
        return self.deliver(deployment_id, message)

    def deliver(self, deployment_id: str, message: AgentMessage) -> AgentMessage:
        """Deliver a concrete message (again, possibly) and trace both legs."""
        agent = self._agents.get(message.recipient)
        if agent is None:
            raise UnknownAgentError(f"no agent {message.recipient}")
        self._trace(deployment_id, "send", message)
        ack = agent.handle(message)
        self._trace(deployment_id, "recv", ack)
        return ack

    def push_config(self, deployment_id: str, kind: UnitKind, config: Mapping) -> AgentMessage:
        return self.send(
            deployment_id, kind, MessageKind.CONFIG_PUSH, {"config": dict(config)}
        )

    def affiliate(
        self, deployment_id: str, units: Mapping[UnitKind, UnitRecord]
    ) -> dict[UnitKind, AgentMessage]:
        """Cross-wire unit addresses: each unit learns the IPs of the
        units it has a direct interface with (CU-DU midhaul, DU-RU
        fronthaul)."""
        cu_ip = units[UnitKind.CU].ip_address
        du_ip = units[UnitKind.DU].ip_address
        ru_ip = units[UnitKind.RU].ip_address
        peers = {
            UnitKind.CU: {"duIp": du_ip},
            UnitKind.DU: {"cuIp": cu_ip, "ruIp": ru_ip},
            UnitKind.RU: {"duIp": du_ip},
        }
        return {
            kind: self.send(
                deployment_id, kind, MessageKind.AFFILIATION_INFO, {"peers": peers[kind]}
            )
            for kind in (UnitKind.CU, UnitKind.DU, UnitKind.RU)
        }

    def start_units(
        self, deployment_id: str, per_unit_delay_s: float = 0.0
    ) -> dict[UnitKind, AgentMessage]:
        """Start the chain core-outward so every unit's upstream peer is
        already up when it comes online. ``per_unit_delay_s`` simulates
        container start latency ahead of each start command."""
        acks = {}
        for kind in (UnitKind.CU, UnitKind.DU, UnitKind.RU):
            if per_unit_delay_s > 0:
                self._clock.sleep(per_unit_delay_s)
            acks[kind] = self.send(deployment_id, kind, MessageKind.START_COMMAND, {})
        return acks

    def status_reports(self, deployment_id: str) -> list[StatusReport]:
        agents = self.agents_for(deployment_id)
        return [agents[kind].report_status() for kind in sorted(agents, key=lambda k: k.value)]

    def _trace(self, deployment_id: str, direction: str, message: AgentMessage) -> None:
        if self._trace_dir is None:
            return
        with self._lock:
            trace = self._traces.get(deployment_id)
            if trace is None:
                trace = MessageTrace(self._trace_dir / f"{deployment_id}.jsonl")
                self._traces[deployment_id] = trace
        trace.append(direction, message)
