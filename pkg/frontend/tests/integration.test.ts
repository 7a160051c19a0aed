/** End-to-end check against a real control plane.
 *
 * Spawns the Python API server on a scratch topology and walks the console's
 * workflow through the typed client and view models: the map must show every
 * node with its antenna counts, submitting the create form must produce a
 * deployment that reaches Running in the list, and deleting it must free the
 * antenna badge again. Skipped when the backend is not installed.
 */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import {
  buildDeploymentRows,
  buildMapViewModel,
  EventStore,
  validateOrderForm,
} from "../src/viewmodel.js";

const PORT = 8471;
const BASE = `http://127.0.0.1:${PORT}`;

const TOPOLOGY = {
  nodes: [
    {
      id: "reg-a",
      tier: "Regional",
      position: { lat: 48.9, lon: 2.3 },
      cpuMillicores: 8000,
      ramMb: 16384,
      diskMb: 65536,
      antennas: [],
    },
    {
      id: "edge-b",
      tier: "Edge",
      position: { lat: 48.7, lon: 2.4 },
      cpuMillicores: 6000,
      ramMb: 12288,
      diskMb: 49152,
      antennas: [],
    },
    {
      id: "fe-c",
      tier: "FarEdge",
      position: { lat: 48.6, lon: 2.2 },
      cpuMillicores: 3000,
      ramMb: 6144,
      diskMb: 24576,
      antennas: [
        { serial: "ant-1", position: { lat: 48.6, lon: 2.2 } },
        { serial: "ant-2", position: { lat: 48.601, lon: 2.201 } },
      ],
    },
  ],
  links: [
    { a: "reg-a", b: "edge-b", latencyMs: 0.5, bandwidthMbps: 100000 },
    { a: "edge-b", b: "fe-c", latencyMs: 0.2, bandwidthMbps: 50000 },
  ],
};

function backendAvailable(): boolean {
  const probe = spawnSync("python3", ["-c", "import ztc"], { timeout: 30000 });
  return probe.status === 0;
}

async function sleep(ms: number): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitFor<T>(
  probe: () => Promise<T | null>,
  timeoutMs: number,
  what: string,
): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const value = await probe();
      if (value !== null) return value;
    } catch (error) {
      lastError = error;
    }
    await sleep(200);
  }
  throw new Error(`timed out waiting for ${what}: ${String(lastError)}`);
}

describe.skipIf(!backendAvailable())("console against a live control plane", () => {
  let server: ChildProcess;
  let workDir: string;
  const api = new ApiClient(BASE);
  let deploymentId: string;

  beforeAll(async () => {
    workDir = mkdtempSync(join(tmpdir(), "nms-ui-"));
    const topologyPath = join(workDir, "topology.json");
    writeFileSync(topologyPath, JSON.stringify(TOPOLOGY));
    server = spawn(
      "python3",
      [
        "-m",
        "ztc.cli",
        "serve",
        "--topology",
        topologyPath,
        "--port",
        String(PORT),
        "--host",
        "127.0.0.1",
        "--data-dir",
        join(workDir, "data"),
      ],
      { stdio: ["ignore", "inherit", "inherit"] },
    );
    await waitFor(
      async () => {
        const response = await fetch(`${BASE}/api/nodes`);
        return response.ok ? true : null;
      },
      30000,
      "the control plane to accept requests",
    );
  }, 60000);

  afterAll(async () => {
    server?.kill("SIGTERM");
    await sleep(300);
    server?.kill("SIGKILL");
    rmSync(workDir, { recursive: true, force: true });
  });

  it("maps every substrate node with its antenna counts", async () => {
    const { nodes } = await api.listNodes();
    const { deployments } = await api.listDeployments();
    const vm = buildMapViewModel(nodes, deployments);
    expect(vm.markers.map((m) => m.nodeId).sort()).toEqual(["edge-b", "fe-c", "reg-a"]);
    const fe = vm.markers.find((m) => m.nodeId === "fe-c")!;
    expect(fe.antennaTotal).toBe(2);
    expect(fe.badge).toBe("0/2 occupied");
    expect(vm.markers.find((m) => m.nodeId === "reg-a")!.badge).toBe("");
  });

  it("turns a valid create form into a deployment that reaches Running", async () => {
    const form = validateOrderForm({
      tag: "console-smoke",
      centerLat: "48.6",
      centerLon: "2.2",
      radiusKm: "5",
      maxUsers: "32",
      spectrumBand: "n78",
    });
    expect(form.errors).toEqual({});
    const accepted = await api.submitOrder(form.order!);
    deploymentId = accepted.deploymentId;

    const running = await waitFor(
      async () => {
        const { deployments } = await api.listDeployments();
        const row = buildDeploymentRows(deployments).find(
          (r) => r.deploymentId === deploymentId,
        );
        return row !== undefined && row.lifecycle === "Running" ? row : null;
      },
      20000,
      `${deploymentId} to reach Running`,
    );
    expect(running.tag).toBe("console-smoke");
    expect(running.chainSummary).toContain("fe-c");

    const { nodes } = await api.listNodes();
    const { deployments } = await api.listDeployments();
    const vm = buildMapViewModel(nodes, deployments);
    expect(vm.markers.find((m) => m.nodeId === "fe-c")!.badge).toBe("1/2 occupied");
    expect(vm.chains).toHaveLength(1);
    expect(vm.chains[0]?.nodeIds).toEqual(["reg-a", "edge-b", "fe-c"]);

    const detail = await api.getDeployment(deploymentId);
    expect(detail.units?.ru?.config["sdr_addrs"]).toMatch(/^serial=ant-/);
    expect(detail.kpi?.deploymentDurationMs).toBeGreaterThan(0);

    const store = new EventStore();
    const batch = await api.events(0);
    store.ingest(batch.events, batch.latestSeq);
    const steps = store.forDeployment(deploymentId).map((e) => e.step);
    expect(steps[0]).toBe("refresh_catalog");
    expect(steps.at(-1)).toBe("running");
  }, 30000);

  it("frees the antenna badge when the deployment is deleted", async () => {
    await api.deleteDeployment(deploymentId);
    await waitFor(
      async () => {
        const { nodes } = await api.listNodes();
        const vm = buildMapViewModel(nodes, []);
        return vm.markers.find((m) => m.nodeId === "fe-c")!.badge === "0/2 occupied"
          ? true
          : null;
      },
      10000,
      "the antenna lease to be released",
    );
    const { deployments } = await api.listDeployments();
    expect(deployments.find((d) => d.deploymentId === deploymentId)).toBeUndefined();
  }, 20000);
});
