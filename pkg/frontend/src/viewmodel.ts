/** Pure projections from API payloads to renderable structures.
 *
 * Nothing in here touches the DOM or the network, so every rule the UI
 * enforces (marker placement, badge counts, form validation, event
 * de-duplication) is testable with plain objects.
 */

import type {
  DeploymentView,
  GeoPoint,
  NodeView,
  OrderRequest,
  StreamEvent,
  Tier,
  UsageSample,
} from "./types.js";

export const TIER_COLORS: Record<Tier, string> = {
  Regional: "#7c3aed",
  Edge: "#2563eb",
  FarEdge: "#059669",
};

export interface MapMarker {
  nodeId: string;
  tier: Tier;
  color: string;
  x: number;
  y: number;
  antennaTotal: number;
  antennaOccupied: number;
  /** "occupied/total occupied", e.g. "1/2 occupied"; empty for antenna-less nodes. */
  badge: string;
  cpuUsedPct: number;
  ramUsedPct: number;
}

export interface ChainOverlay {
  deploymentId: string;
  tag: string;
  nodeIds: [string, string, string];
  points: Array<{ x: number; y: number }>;
}

export interface GeoBounds {
  latMin: number;
  latMax: number;
  lonMin: number;
  lonMax: number;
}

export interface MapViewModel {
  width: number;
  height: number;
  markers: MapMarker[];
  chains: ChainOverlay[];
  /** Node bounding box backing the projection; null for an empty map. */
  bounds: GeoBounds | null;
}

const MAP_PADDING_PX = 40;

/** Linear lat/lon → canvas projection over the nodes' bounding box.
 * North is up; a degenerate box (single node) centers on the canvas. */
function makeProjection(
  nodes: NodeView[],
  width: number,
  height: number,
): (lat: number, lon: number) => { x: number; y: number } {
  const lats = nodes.map((n) => n.position.lat);
  const lons = nodes.map((n) => n.position.lon);
  const latMin = Math.min(...lats);
  const latMax = Math.max(...lats);
  const lonMin = Math.min(...lons);
  const lonMax = Math.max(...lons);
  const latSpan = latMax - latMin;
  const lonSpan = lonMax - lonMin;
  const innerW = width - 2 * MAP_PADDING_PX;
  const innerH = height - 2 * MAP_PADDING_PX;
  return (lat, lon) => ({
    x: lonSpan === 0 ? width / 2 : MAP_PADDING_PX + ((lon - lonMin) / lonSpan) * innerW,
    y: latSpan === 0 ? height / 2 : MAP_PADDING_PX + ((latMax - lat) / latSpan) * innerH,
  });
}

function percent(used: number, capacity: number): number {
  return capacity > 0 ? Math.round((used / capacity) * 100) : 0;
}

export function buildMapViewModel(
  nodes: NodeView[],
  deployments: DeploymentView[],
  width = 800,
  height = 520,
): MapViewModel {
  if (nodes.length === 0) {
    return { width, height, markers: [], chains: [], bounds: null };
  }
  const bounds: GeoBounds = {
    latMin: Math.min(...nodes.map((n) => n.position.lat)),
    latMax: Math.max(...nodes.map((n) => n.position.lat)),
    lonMin: Math.min(...nodes.map((n) => n.position.lon)),
    lonMax: Math.max(...nodes.map((n) => n.position.lon)),
  };
  const project = makeProjection(nodes, width, height);
  const markers = nodes.map((node): MapMarker => {
    const { x, y } = project(node.position.lat, node.position.lon);
    const total = node.antennas.length;
    const occupied = node.antennas.filter((a) => a.occupiedBy !== null).length;
    return {
      nodeId: node.nodeId,
      tier: node.tier,
      color: TIER_COLORS[node.tier],
      x,
      y,
      antennaTotal: total,
      antennaOccupied: occupied,
      badge: total > 0 ? `${occupied}/${total} occupied` : "",
      cpuUsedPct: percent(node.cpuUsedMillicores, node.cpuCapacityMillicores),
      ramUsedPct: percent(node.ramUsedMb, node.ramCapacityMb),
    };
  });
  const byId = new Map(markers.map((m) => [m.nodeId, m]));
  const chains: ChainOverlay[] = [];
  for (const deployment of deployments) {
    if (deployment.lifecycle !== "Running" || deployment.chain === null) continue;
    const ids: [string, string, string] = [
      deployment.chain.cuNodeId,
      deployment.chain.duNodeId,
      deployment.chain.ruNodeId,
    ];
    const resolved = ids.map((id) => byId.get(id));
    if (resolved.some((m) => m === undefined)) continue;
    chains.push({
      deploymentId: deployment.deploymentId,
      tag: deployment.tag,
      nodeIds: ids,
      points: (resolved as MapMarker[]).map((m) => ({ x: m.x, y: m.y })),
    });
  }
  return { width, height, markers, chains, bounds };
}

/** Inverse of the map projection: canvas coordinates → lat/lon. Used when a
 * map click seeds the order form's coverage center. */
export function canvasToGeo(vm: MapViewModel, x: number, y: number): GeoPoint | null {
  if (vm.bounds === null) return null;
  const { latMin, latMax, lonMin, lonMax } = vm.bounds;
  const innerW = vm.width - 2 * MAP_PADDING_PX;
  const innerH = vm.height - 2 * MAP_PADDING_PX;
  const lonSpan = lonMax - lonMin;
  const latSpan = latMax - latMin;
  const lon = lonSpan === 0 ? lonMin : lonMin + ((x - MAP_PADDING_PX) / innerW) * lonSpan;
  const lat = latSpan === 0 ? latMin : latMax - ((y - MAP_PADDING_PX) / innerH) * latSpan;
  return { lat, lon };
}

/** Raw field values as typed into the create-order form. */
export interface OrderFormInput {
  tag: string;
  centerLat: string;
  centerLon: string;
  radiusKm: string;
  maxUsers: string;
  spectrumBand: string;
}

export interface OrderFormResult {
  /** Field name → message; empty when the form is valid. */
  errors: Partial<Record<keyof OrderFormInput, string>>;
  order: OrderRequest | null;
}

export function validateOrderForm(input: OrderFormInput): OrderFormResult {
  const errors: OrderFormResult["errors"] = {};
  const tag = input.tag.trim();
  if (tag === "") {
    errors.tag = "tag is required";
  }
  const lat = Number(input.centerLat);
  if (input.centerLat.trim() === "" || !Number.isFinite(lat) || lat < -90 || lat > 90) {
    errors.centerLat = "latitude must be between -90 and 90";
  }
  const lon = Number(input.centerLon);
  if (input.centerLon.trim() === "" || !Number.isFinite(lon) || lon < -180 || lon > 180) {
    errors.centerLon = "longitude must be between -180 and 180";
  }
  const radius = Number(input.radiusKm);
  if (input.radiusKm.trim() === "" || !Number.isFinite(radius) || radius <= 0) {
    errors.radiusKm = "coverage radius must be greater than zero";
  }
  const users = Number(input.maxUsers);
  if (input.maxUsers.trim() === "" || !Number.isInteger(users) || users < 1) {
    errors.maxUsers = "max users must be a whole number of at least 1";
  }
  const band = input.spectrumBand.trim();
  if (band === "") {
    errors.spectrumBand = "spectrum band is required";
  }
  if (Object.keys(errors).length > 0) {
    return { errors, order: null };
  }
  return {
    errors,
    order: {
      tag,
      coverageCenter: { lat, lon },
      coverageRadiusKm: radius,
      maxUsers: users,
      spectrumBand: band,
    },
  };
}

/** Commissioning-event accumulator for the polled /api/events stream.
 *
 * Entries are keyed by their global sequence number, so overlapping polls
 * are idempotent and a re-delivered seq simply overwrites (last write
 * wins). `cursor` is the highest seq seen, i.e. the next poll's `since`.
 */
export class EventStore {
  private readonly bySeq = new Map<number, StreamEvent>();
  private _cursor = 0;

  get cursor(): number {
    return this._cursor;
  }

  ingest(events: StreamEvent[], latestSeq?: number): void {
    for (const event of events) {
      this.bySeq.set(event.seq, event);
      if (event.seq > this._cursor) this._cursor = event.seq;
    }
    if (latestSeq !== undefined && latestSeq > this._cursor) {
      this._cursor = latestSeq;
    }
  }

  all(): StreamEvent[] {
    return [...this.bySeq.values()].sort((a, b) => a.seq - b.seq);
  }

  forDeployment(deploymentId: string): StreamEvent[] {
    return this.all().filter((e) => e.deploymentId === deploymentId);
  }

  get size(): number {
    return this.bySeq.size;
  }
}

export interface UsageSeries {
  nodeId: string;
  timestamps: number[];
  cpuUsedMillicores: number[];
  ramUsedMb: number[];
}

/** Per-node time series for the CPU/RAM sparklines, in sample order. */
export function buildUsageSeries(usage: UsageSample[], nodeId: string): UsageSeries {
  const samples = usage
    .filter((s) => s.nodeId === nodeId)
    .sort((a, b) => a.timestamp - b.timestamp);
  return {
    nodeId,
    timestamps: samples.map((s) => s.timestamp),
    cpuUsedMillicores: samples.map((s) => s.cpuUsedMillicores),
    ramUsedMb: samples.map((s) => s.ramUsedMb),
  };
}

/** Deployment-list rows, newest first; Running chains summarized. */
export interface DeploymentRow {
  deploymentId: string;
  tag: string;
  lifecycle: string;
  chainSummary: string;
  createdAt: number;
}

export function buildDeploymentRows(deployments: DeploymentView[]): DeploymentRow[] {
  return [...deployments]
    .sort((a, b) => b.createdAt - a.createdAt)
    .map((d) => ({
      deploymentId: d.deploymentId,
      tag: d.tag,
      lifecycle: d.lifecycle,
      chainSummary: d.chain
        ? `${d.chain.cuNodeId} / ${d.chain.duNodeId} / ${d.chain.ruNodeId} (${d.chain.antennaSerial})`
        : "—",
      createdAt: d.createdAt,
    }));
}
