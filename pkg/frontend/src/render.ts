/** HTML/SVG string builders.
 *
 * Pure functions from view models to markup, so rendering is assertable
 * without a DOM. The app layer owns element lookup and event wiring; the
 * markers here carry `data-*` attributes for it to delegate on.
 */

import type { DeploymentView, EventLogEntry, StreamEvent, UnitView } from "./types.js";
import type {
  DeploymentRow,
  MapViewModel,
  OrderFormInput,
  OrderFormResult,
  UsageSeries,
} from "./viewmodel.js";

export function escapeHtml(value: unknown): string {
  return String(value)
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

const MARKER_RADIUS = 9;

/** Substrate map: tier-colored node markers with antenna badges, plus a
 * CU→DU→RU polyline per running chain. Plain coordinate canvas. */
export function renderMap(vm: MapViewModel): string {
  const chains = vm.chains
    .map((chain) => {
      const points = chain.points.map((p) => `${p.x.toFixed(1)},${p.y.toFixed(1)}`).join(" ");
      return (
        `<polyline class="chain" data-deployment-id="${escapeHtml(chain.deploymentId)}" ` +
        `points="${points}" fill="none" stroke="#f59e0b" stroke-width="3">` +
        `<title>${escapeHtml(chain.tag)}: ${escapeHtml(chain.nodeIds.join(" → "))}</title>` +
        `</polyline>`
      );
    })
    .join("");
  const markers = vm.markers
    .map((m) => {
      const badge = m.badge
        ? `<text class="badge" x="${(m.x + 12).toFixed(1)}" y="${(m.y + 4).toFixed(1)}">` +
          `${escapeHtml(m.badge)}</text>`
        : "";
      return (
        `<g class="marker" data-node-id="${escapeHtml(m.nodeId)}" data-tier="${m.tier}">` +
        `<circle cx="${m.x.toFixed(1)}" cy="${m.y.toFixed(1)}" r="${MARKER_RADIUS}" ` +
        `fill="${m.color}"><title>${escapeHtml(m.nodeId)} (${m.tier}) — ` +
        `CPU ${m.cpuUsedPct}%, RAM ${m.ramUsedPct}%</title></circle>` +
        `<text class="label" x="${m.x.toFixed(1)}" y="${(m.y - 14).toFixed(1)}" ` +
        `text-anchor="middle">${escapeHtml(m.nodeId)}</text>` +
        badge +
        `</g>`
      );
    })
    .join("");
  return (
    `<svg class="map" viewBox="0 0 ${vm.width} ${vm.height}" ` +
    `xmlns="http://www.w3.org/2000/svg">${chains}${markers}</svg>`
  );
}

export function renderDeploymentList(rows: DeploymentRow[]): string {
  if (rows.length === 0) {
    return `<p class="empty">No deployments yet.</p>`;
  }
  const body = rows
    .map(
      (row) =>
        `<tr data-deployment-id="${escapeHtml(row.deploymentId)}">` +
        `<td><a href="#/deployments/${escapeHtml(row.deploymentId)}">` +
        `${escapeHtml(row.deploymentId)}</a></td>` +
        `<td>${escapeHtml(row.tag)}</td>` +
        `<td><span class="state state-${escapeHtml(row.lifecycle)}">` +
        `${escapeHtml(row.lifecycle)}</span></td>` +
        `<td>${escapeHtml(row.chainSummary)}</td>` +
        `<td><button data-action="delete" data-deployment-id=` +
        `"${escapeHtml(row.deploymentId)}">Delete</button></td>` +
        `</tr>`,
    )
    .join("");
  return (
    `<table class="deployments"><thead><tr>` +
    `<th>Deployment</th><th>Tag</th><th>State</th><th>Chain (CU / DU / RU)</th><th></th>` +
    `</tr></thead><tbody>${body}</tbody></table>`
  );
}

function renderUnit(kind: string, unit: UnitView | undefined): string {
  if (unit === undefined) {
    return `<div class="unit"><h4>${escapeHtml(kind)}</h4><p>not created</p></div>`;
  }
  const configRows = Object.entries(unit.config)
    .map(
      ([key, value]) =>
        `<tr><td>${escapeHtml(key)}</td><td>${escapeHtml(JSON.stringify(value))}</td></tr>`,
    )
    .join("");
  return (
    `<div class="unit"><h4>${escapeHtml(kind)} on ${escapeHtml(unit.nodeId)}</h4>` +
    `<p>state ${escapeHtml(unit.state)} · ip ${escapeHtml(unit.ipAddress ?? "—")}` +
    (unit.antennaSerial ? ` · antenna ${escapeHtml(unit.antennaSerial)}` : "") +
    `</p><table class="config">${configRows}</table></div>`
  );
}

function renderTimeline(eventLog: EventLogEntry[]): string {
  const rows = eventLog
    .map(
      (entry) =>
        `<li><time>${entry.timestamp.toFixed(3)}</time> ` +
        `<b>${escapeHtml(entry.step)}</b>` +
        (entry.detail ? ` — ${escapeHtml(entry.detail)}` : "") +
        `</li>`,
    )
    .join("");
  return `<ol class="timeline">${rows}</ol>`;
}

export function renderDeploymentDetail(deployment: DeploymentView): string {
  const units = deployment.units ?? {};
  const kpi =
    deployment.kpi != null
      ? `<p class="kpi">Commissioned in ` +
        `<b>${deployment.kpi.deploymentDurationMs.toFixed(0)} ms</b></p>`
      : "";
  const abort = deployment.abortReason
    ? `<p class="abort">Aborted: ${escapeHtml(deployment.abortReason)}</p>`
    : "";
  return (
    `<article class="detail" data-deployment-id="${escapeHtml(deployment.deploymentId)}">` +
    `<h3>${escapeHtml(deployment.deploymentId)} · ${escapeHtml(deployment.tag)}</h3>` +
    `<p>state <span class="state state-${escapeHtml(deployment.lifecycle)}">` +
    `${escapeHtml(deployment.lifecycle)}</span></p>` +
    kpi +
    abort +
    `<section class="units">` +
    renderUnit("CU", units.cu) +
    renderUnit("DU", units.du) +
    renderUnit("RU", units.ru) +
    `</section>` +
    `<h4>Commissioning timeline</h4>` +
    renderTimeline(deployment.eventLog) +
    `<button data-action="delete" data-deployment-id=` +
    `"${escapeHtml(deployment.deploymentId)}">Delete deployment</button>` +
    `</article>`
  );
}

export function renderNotFound(deploymentId: string): string {
  return (
    `<article class="detail missing"><h3>Not found</h3>` +
    `<p>No deployment <b>${escapeHtml(deploymentId)}</b> — it may have been deleted.</p>` +
    `<p><a href="#/">Back to overview</a></p></article>`
  );
}

export function renderOfflineBanner(offline: boolean): string {
  return offline
    ? `<div class="banner offline" role="alert">Control plane unreachable — ` +
        `showing last known state.</div>`
    : "";
}

export function renderFormErrors(result: OrderFormResult): string {
  const entries = Object.entries(result.errors) as Array<[keyof OrderFormInput, string]>;
  return entries
    .map(
      ([field, message]) =>
        `<p class="field-error" data-field="${escapeHtml(field)}">${escapeHtml(message)}</p>`,
    )
    .join("");
}

const SPARK_WIDTH = 120;
const SPARK_HEIGHT = 28;

/** Single-series sparkline; y is normalized to the series' own max. */
export function renderSparkline(values: number[], cssClass: string): string {
  if (values.length === 0) {
    return `<svg class="spark ${cssClass}" viewBox="0 0 ${SPARK_WIDTH} ${SPARK_HEIGHT}"></svg>`;
  }
  const max = Math.max(...values, 1);
  const step = values.length > 1 ? SPARK_WIDTH / (values.length - 1) : 0;
  const points = values
    .map((v, i) => {
      const x = values.length > 1 ? i * step : SPARK_WIDTH / 2;
      const y = SPARK_HEIGHT - (v / max) * (SPARK_HEIGHT - 2) - 1;
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
  return (
    `<svg class="spark ${cssClass}" viewBox="0 0 ${SPARK_WIDTH} ${SPARK_HEIGHT}">` +
    `<polyline points="${points}" fill="none" stroke="currentColor" stroke-width="1.5"/>` +
    `</svg>`
  );
}

export function renderUsagePanel(series: UsageSeries): string {
  const latestCpu = series.cpuUsedMillicores.at(-1) ?? 0;
  const latestRam = series.ramUsedMb.at(-1) ?? 0;
  return (
    `<div class="usage" data-node-id="${escapeHtml(series.nodeId)}">` +
    `<h4>${escapeHtml(series.nodeId)}</h4>` +
    `<p>CPU ${latestCpu} m ${renderSparkline(series.cpuUsedMillicores, "cpu")}</p>` +
    `<p>RAM ${latestRam} MB ${renderSparkline(series.ramUsedMb, "ram")}</p>` +
    `</div>`
  );
}

export function renderEventFeed(events: StreamEvent[], limit = 30): string {
  const rows = events
    .slice(-limit)
    .reverse()
    .map(
      (event) =>
        `<li data-seq="${event.seq}"><b>${escapeHtml(event.deploymentId)}</b> ` +
        `${escapeHtml(event.step)}` +
        (event.detail ? ` — ${escapeHtml(event.detail)}` : "") +
        `</li>`,
    )
    .join("");
  return `<ul class="feed">${rows}</ul>`;
}
