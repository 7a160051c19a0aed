/** Thin typed client over the control-plane REST API.
 *
 * Every method maps to exactly one endpoint; no state is kept here so the
 * view layer stays the single source of truth for what was last seen.
 */

import type {
  DeploymentView,
  DeploymentsResponse,
  EventsResponse,
  MetricsResponse,
  NodesResponse,
  NodeView,
  OrderAccepted,
  OrderRequest,
} from "./types.js";

/** Non-2xx response; `body` carries the server's JSON error payload. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: unknown,
  ) {
    super(`HTTP ${status}: ${JSON.stringify(body)}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      throw new ApiError(response.status, body);
    }
    return body as T;
  }

  listNodes(): Promise<NodesResponse> {
    return this.request<NodesResponse>("/api/nodes");
  }

  getNode(nodeId: string): Promise<NodeView> {
    return this.request<NodeView>(`/api/nodes/${encodeURIComponent(nodeId)}`);
  }

  listDeployments(filter?: { tag?: string; state?: string }): Promise<DeploymentsResponse> {
    const params = new URLSearchParams();
    if (filter?.tag) params.set("tag", filter.tag);
    if (filter?.state) params.set("state", filter.state);
    const query = params.toString();
    return this.request<DeploymentsResponse>(`/api/deployments${query ? `?${query}` : ""}`);
  }

  getDeployment(deploymentId: string): Promise<DeploymentView> {
    return this.request<DeploymentView>(
      `/api/deployments/${encodeURIComponent(deploymentId)}`,
    );
  }

  submitOrder(order: OrderRequest, sync = false): Promise<OrderAccepted> {
    return this.request<OrderAccepted>(`/api/orders${sync ? "?sync=true" : ""}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(order),
    });
  }

  deleteDeployment(deploymentId: string): Promise<OrderAccepted> {
    return this.request<OrderAccepted>(
      `/api/deployments/${encodeURIComponent(deploymentId)}`,
      { method: "DELETE" },
    );
  }

  events(since = 0): Promise<EventsResponse> {
    return this.request<EventsResponse>(`/api/events?since=${since}`);
  }

  metrics(): Promise<MetricsResponse> {
    return this.request<MetricsResponse>("/api/metrics");
  }
}
