/** Builders for API payloads used across the unit tests. */

import type {
  AntennaView,
  DeploymentView,
  NodeView,
  OrderConstraints,
  StreamEvent,
} from "../src/types.js";

export function makeAntenna(serial: string, occupiedBy: string | null = null): AntennaView {
  return { serial, position: { lat: 48.6, lon: 2.2 }, occupiedBy };
}

export function makeNode(partial: Partial<NodeView> & { nodeId: string }): NodeView {
  return {
    tier: "Edge",
    position: { lat: 48.7, lon: 2.4 },
    cpuCapacityMillicores: 6000,
    cpuUsedMillicores: 0,
    ramCapacityMb: 12288,
    ramUsedMb: 0,
    diskCapacityMb: 49152,
    diskUsedMb: 0,
    antennas: [],
    ...partial,
  };
}

/** One node per tier; the far-edge node carries two antennas. */
export function threeNodeFixture(occupiedBy: string | null = null): NodeView[] {
  return [
    makeNode({
      nodeId: "reg-a",
      tier: "Regional",
      position: { lat: 48.9, lon: 2.3 },
      cpuCapacityMillicores: 8000,
      cpuUsedMillicores: 1000,
    }),
    makeNode({ nodeId: "edge-b", tier: "Edge", position: { lat: 48.7, lon: 2.4 } }),
    makeNode({
      nodeId: "fe-c",
      tier: "FarEdge",
      position: { lat: 48.6, lon: 2.2 },
      cpuCapacityMillicores: 3000,
      antennas: [makeAntenna("ant-1", occupiedBy), makeAntenna("ant-2")],
    }),
  ];
}

export const DEFAULT_CONSTRAINTS: OrderConstraints = {
  fronthaulLatencyMsMax: 1.0,
  midhaulLatencyMsMax: 10.0,
  endToEndLatencyMsMax: 1.0,
  fronthaulBandwidthMbpsMin: 1000.0,
  perUnitDemand: {
    cu: { cpuMillicores: 1000, ramMb: 2048, diskMb: 8192 },
    du: { cpuMillicores: 1500, ramMb: 3072, diskMb: 8192 },
    ru: { cpuMillicores: 500, ramMb: 1024, diskMb: 4096 },
  },
};

export function makeDeployment(
  partial: Partial<DeploymentView> & { deploymentId: string },
): DeploymentView {
  return {
    tag: "pilot",
    order: {
      tag: "pilot",
      coverageCenter: { lat: 48.6, lon: 2.2 },
      coverageRadiusKm: 5,
      maxUsers: 32,
      spectrumBand: "n78",
      constraints: DEFAULT_CONSTRAINTS,
    },
    createdAt: 1000.0,
    lifecycle: "Running",
    chain: {
      cuNodeId: "reg-a",
      duNodeId: "edge-b",
      ruNodeId: "fe-c",
      antennaSerial: "ant-1",
      score: 0.85,
    },
    units: {
      cu: {
        unitKind: "CU",
        nodeId: "reg-a",
        ipAddress: "10.42.0.2",
        antennaSerial: null,
        config: { du_peer: "10.42.0.3" },
        state: "Running",
      },
      du: {
        unitKind: "DU",
        nodeId: "edge-b",
        ipAddress: "10.42.0.3",
        antennaSerial: null,
        config: { cu_peer: "10.42.0.2", ru_peer: "10.42.0.4" },
        state: "Running",
      },
      ru: {
        unitKind: "RU",
        nodeId: "fe-c",
        ipAddress: "10.42.0.4",
        antennaSerial: "ant-1",
        config: { du_peer: "10.42.0.3", sdr_addrs: "serial=ant-1" },
        state: "Running",
      },
    },
    eventLog: [
      { timestamp: 1000.1, step: "refresh_catalog", detail: null },
      { timestamp: 1000.2, step: "select_chain", detail: "fe-c/ant-1" },
      { timestamp: 1000.9, step: "running", detail: null },
    ],
    abortReason: null,
    ...partial,
  };
}

export function makeEvent(seq: number, partial: Partial<StreamEvent> = {}): StreamEvent {
  return {
    seq,
    deploymentId: "d-001",
    timestamp: 1000 + seq,
    step: "discover",
    detail: null,
    ...partial,
  };
}
