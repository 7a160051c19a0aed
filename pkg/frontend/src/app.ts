/** Browser entry point: polls the control plane and re-renders.
 *
 * The UI keeps no state of its own beyond "what the API last said" — every
 * tick pulls the event stream and, when it moved, re-pulls nodes and
 * deployments so the screen is always a projection of server state. A
 * failed poll raises the offline banner but leaves the stale data visible.
 */

import { ApiClient, ApiError } from "./api.js";
import type { DeploymentView, NodeView } from "./types.js";
import {
  buildDeploymentRows,
  buildMapViewModel,
  buildUsageSeries,
  canvasToGeo,
  EventStore,
  validateOrderForm,
  type MapViewModel,
  type OrderFormInput,
} from "./viewmodel.js";
import {
  renderDeploymentDetail,
  renderDeploymentList,
  renderEventFeed,
  renderFormErrors,
  renderMap,
  renderNotFound,
  renderOfflineBanner,
  renderUsagePanel,
} from "./render.js";

const POLL_INTERVAL_MS = 1000;

type Route = { kind: "overview" } | { kind: "detail"; deploymentId: string };

export function parseRoute(hash: string): Route {
  const match = /^#\/deployments\/([^/]+)$/.exec(hash);
  if (match !== null && match[1] !== undefined) {
    return { kind: "detail", deploymentId: decodeURIComponent(match[1]) };
  }
  return { kind: "overview" };
}

interface AppState {
  nodes: NodeView[];
  deployments: DeploymentView[];
  detail: DeploymentView | null;
  detailMissing: string | null;
  offline: boolean;
  mapViewModel: MapViewModel | null;
  usage: Map<string, ReturnType<typeof buildUsageSeries>>;
}

export class App {
  private readonly events = new EventStore();
  private readonly state: AppState = {
    nodes: [],
    deployments: [],
    detail: null,
    detailMissing: null,
    offline: false,
    mapViewModel: null,
    usage: new Map(),
  };
  private route: Route = { kind: "overview" };
  private timer: number | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly root: Document,
  ) {}

  start(): void {
    this.route = parseRoute(this.root.defaultView?.location.hash ?? "");
    this.root.defaultView?.addEventListener("hashchange", () => {
      this.route = parseRoute(this.root.defaultView?.location.hash ?? "");
      void this.refresh(true);
    });
    this.root.addEventListener("click", (event) => this.onClick(event));
    const form = this.root.querySelector<HTMLFormElement>("#order-form");
    form?.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitOrder(form);
    });
    void this.refresh(true);
    this.timer = this.root.defaultView?.setInterval(
      () => void this.tick(),
      POLL_INTERVAL_MS,
    ) as number;
  }

  stop(): void {
    if (this.timer !== null) {
      this.root.defaultView?.clearInterval(this.timer);
      this.timer = null;
    }
  }

  /** One poll cycle: cheap events probe, full refresh only on movement. */
  private async tick(): Promise<void> {
    try {
      const batch = await this.api.events(this.events.cursor);
      const moved = batch.events.length > 0;
      this.events.ingest(batch.events, batch.latestSeq);
      this.state.offline = false;
      if (moved) {
        await this.refresh(false);
      } else {
        await this.refreshMetrics();
        this.render();
      }
    } catch {
      this.state.offline = true;
      this.render();
    }
  }

  private async refresh(initial: boolean): Promise<void> {
    try {
      if (initial) {
        const batch = await this.api.events(this.events.cursor);
        this.events.ingest(batch.events, batch.latestSeq);
      }
      const [nodes, deployments] = await Promise.all([
        this.api.listNodes(),
        this.api.listDeployments(),
      ]);
      this.state.nodes = nodes.nodes;
      this.state.deployments = deployments.deployments;
      await this.refreshMetrics();
      await this.refreshDetail();
      this.state.offline = false;
    } catch {
      this.state.offline = true;
    }
    this.render();
  }

  private async refreshMetrics(): Promise<void> {
    const metrics = await this.api.metrics();
    this.state.usage = new Map(
      this.state.nodes.map((node) => [
        node.nodeId,
        buildUsageSeries(metrics.usage, node.nodeId),
      ]),
    );
  }

  private async refreshDetail(): Promise<void> {
    if (this.route.kind !== "detail") {
      this.state.detail = null;
      this.state.detailMissing = null;
      return;
    }
    try {
      this.state.detail = await this.api.getDeployment(this.route.deploymentId);
      this.state.detailMissing = null;
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        this.state.detail = null;
        this.state.detailMissing = this.route.deploymentId;
        return;
      }
      throw error;
    }
  }

  private onClick(event: Event): void {
    const target = event.target as Element | null;
    if (target === null) return;
    const deleteButton = target.closest<HTMLElement>("[data-action='delete']");
    if (deleteButton !== null) {
      const id = deleteButton.dataset["deploymentId"];
      if (id !== undefined) void this.deleteDeployment(id);
      return;
    }
    const svg = target.closest<SVGSVGElement>("svg.map");
    if (svg !== null && this.state.mapViewModel !== null) {
      this.seedCenterFromClick(svg, event as MouseEvent, this.state.mapViewModel);
    }
  }

  private seedCenterFromClick(svg: SVGSVGElement, event: MouseEvent, vm: MapViewModel): void {
    const rect = svg.getBoundingClientRect();
    if (rect.width === 0 || rect.height === 0) return;
    const x = ((event.clientX - rect.left) / rect.width) * vm.width;
    const y = ((event.clientY - rect.top) / rect.height) * vm.height;
    const geo = canvasToGeo(vm, x, y);
    if (geo === null) return;
    const lat = this.root.querySelector<HTMLInputElement>("#order-form [name='centerLat']");
    const lon = this.root.querySelector<HTMLInputElement>("#order-form [name='centerLon']");
    if (lat !== null) lat.value = geo.lat.toFixed(4);
    if (lon !== null) lon.value = geo.lon.toFixed(4);
  }

  private async submitOrder(form: HTMLFormElement): Promise<void> {
    const data = new FormData(form);
    const input: OrderFormInput = {
      tag: String(data.get("tag") ?? ""),
      centerLat: String(data.get("centerLat") ?? ""),
      centerLon: String(data.get("centerLon") ?? ""),
      radiusKm: String(data.get("radiusKm") ?? ""),
      maxUsers: String(data.get("maxUsers") ?? ""),
      spectrumBand: String(data.get("spectrumBand") ?? "n78"),
    };
    const result = validateOrderForm(input);
    const errorBox = this.root.querySelector("#form-errors");
    if (result.order === null) {
      if (errorBox !== null) errorBox.innerHTML = renderFormErrors(result);
      return;
    }
    try {
      await this.api.submitOrder(result.order);
      if (errorBox !== null) errorBox.innerHTML = "";
      form.reset();
      await this.refresh(false);
    } catch (error) {
      if (errorBox !== null && error instanceof ApiError) {
        const body = error.body as { error?: string; reason?: string } | null;
        const message = body?.error ?? body?.reason ?? `request failed (${error.status})`;
        errorBox.innerHTML = `<p class="field-error">${message}</p>`;
      } else {
        this.state.offline = true;
        this.render();
      }
    }
  }

  private async deleteDeployment(deploymentId: string): Promise<void> {
    try {
      await this.api.deleteDeployment(deploymentId);
      await this.refresh(false);
    } catch (error) {
      if (error instanceof ApiError) {
        // Conflict or already gone — the next poll shows the truth.
        await this.refresh(false);
        return;
      }
      this.state.offline = true;
      this.render();
    }
  }

  private render(): void {
    const set = (selector: string, html: string): void => {
      const el = this.root.querySelector(selector);
      if (el !== null) el.innerHTML = html;
    };
    set("#banner", renderOfflineBanner(this.state.offline));
    const vm = buildMapViewModel(this.state.nodes, this.state.deployments);
    this.state.mapViewModel = vm;
    set("#map", renderMap(vm));
    set("#deployments", renderDeploymentList(buildDeploymentRows(this.state.deployments)));
    set("#feed", renderEventFeed(this.events.all()));
    set(
      "#usage",
      [...this.state.usage.values()].map((series) => renderUsagePanel(series)).join(""),
    );
    if (this.route.kind === "detail") {
      if (this.state.detailMissing !== null) {
        set("#detail", renderNotFound(this.state.detailMissing));
      } else if (this.state.detail !== null) {
        set("#detail", renderDeploymentDetail(this.state.detail));
      }
    } else {
      set("#detail", "");
    }
  }
}

export function bootstrap(doc: Document, baseUrl?: string): App {
  const base =
    baseUrl ?? doc.defaultView?.location.origin.replace(/:\d+$/, ":8080") ?? "";
  const app = new App(new ApiClient(base), doc);
  app.start();
  return app;
}

declare global {
  interface Window {
    ZTC_API_BASE?: string;
  }
}

if (typeof document !== "undefined" && document.getElementById("app") !== null) {
  bootstrap(document, window.ZTC_API_BASE);
}
