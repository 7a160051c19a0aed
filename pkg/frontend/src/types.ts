/** Wire types for the control-plane REST API. */

export type Tier = "Regional" | "Edge" | "FarEdge";

export type LifecycleState =
  | "Pending"
  | "Discovering"
  | "Validating"
  | "Rendering"
  | "Deploying"
  | "Configuring"
  | "Affiliating"
  | "Running"
  | "Deleting"
  | "Deleted"
  | "Aborted";

export type UnitState = "Created" | "Configured" | "Affiliated" | "Running" | "Stopped";

export interface GeoPoint {
  lat: number;
  lon: number;
}

export interface AntennaView {
  serial: string;
  position: GeoPoint;
  /** Deployment id currently leasing this antenna, or null if free. */
  occupiedBy: string | null;
}

export interface NodeView {
  nodeId: string;
  tier: Tier;
  position: GeoPoint;
  cpuCapacityMillicores: number;
  cpuUsedMillicores: number;
  ramCapacityMb: number;
  ramUsedMb: number;
  diskCapacityMb: number;
  diskUsedMb: number;
  antennas: AntennaView[];
}

export interface NodesResponse {
  nodes: NodeView[];
}

export interface ResourceDemand {
  cpuMillicores: number;
  ramMb: number;
  diskMb: number;
}

export interface OrderConstraints {
  fronthaulLatencyMsMax: number;
  midhaulLatencyMsMax: number;
  endToEndLatencyMsMax: number;
  fronthaulBandwidthMbpsMin: number;
  perUnitDemand: { cu: ResourceDemand; du: ResourceDemand; ru: ResourceDemand };
}

export interface ServiceOrderView {
  tag: string;
  coverageCenter: GeoPoint;
  coverageRadiusKm: number;
  maxUsers: number;
  spectrumBand: string;
  constraints: OrderConstraints;
}

/** Order document posted to /api/orders; constraints are optional on submit. */
export interface OrderRequest {
  tag: string;
  coverageCenter: GeoPoint;
  coverageRadiusKm: number;
  maxUsers: number;
  spectrumBand?: string;
  constraints?: Partial<OrderConstraints>;
}

export interface ChainView {
  cuNodeId: string;
  duNodeId: string;
  ruNodeId: string;
  antennaSerial: string;
  score: number | null;
}

export interface UnitView {
  unitKind: "CU" | "DU" | "RU";
  nodeId: string;
  ipAddress: string | null;
  antennaSerial: string | null;
  config: Record<string, unknown>;
  state: UnitState;
}

export interface EventLogEntry {
  timestamp: number;
  step: string;
  detail: string | null;
}

export interface KpiTimeline {
  tZtcDeployStart: number | null;
  tZtcRunning: number | null;
  tRanDeployStart: number | null;
  tRanRunning: number | null;
}

export interface KpiReport {
  deploymentId: string;
  deploymentDurationMs: number;
  timeline: KpiTimeline;
  perStepDurationsMs: Record<string, number>;
}

export interface DeploymentView {
  deploymentId: string;
  tag: string;
  order: ServiceOrderView;
  createdAt: number;
  lifecycle: LifecycleState;
  chain: ChainView | null;
  units: { cu?: UnitView; du?: UnitView; ru?: UnitView } | null;
  eventLog: EventLogEntry[];
  abortReason: string | null;
  /** Present only on the detail endpoint; null until the chain is Running. */
  kpi?: KpiReport | null;
}

export interface DeploymentsResponse {
  deployments: DeploymentView[];
}

export interface OrderAccepted {
  deploymentId: string;
  lifecycle: LifecycleState;
}

export interface StreamEvent {
  seq: number;
  deploymentId: string;
  timestamp: number;
  step: string;
  detail: string | null;
}

export interface EventsResponse {
  events: StreamEvent[];
  latestSeq: number;
}

export interface UsageSample {
  nodeId: string;
  timestamp: number;
  cpuUsedMillicores: number;
  ramUsedMb: number;
}

export interface MetricsResponse {
  kpis: KpiReport[];
  usage: UsageSample[];
}
