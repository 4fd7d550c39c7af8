// Plain-language labels: the UI never surfaces ML jargon for type names.

import type { SemanticType } from "./types.js";

const TYPE_LABELS: Record<SemanticType, string> = {
  number: "Number",
  category: "Category",
  binary: "Yes / No",
  text: "Text",
};

export function typeLabel(t: SemanticType): string {
  return TYPE_LABELS[t] ?? t;
}

export function percent(p: number): string {
  return `${(p * 100).toFixed(1)}%`;
}

export function metricSummary(metrics: { accuracy?: number; mse?: number; loss: number }): string {
  if (metrics.accuracy !== undefined && metrics.accuracy !== null) {
    return `Accuracy ${percent(metrics.accuracy)}`;
  }
  if (metrics.mse !== undefined && metrics.mse !== null) {
    return `Mean squared error ${metrics.mse.toPrecision(4)}`;
  }
  return `Loss ${metrics.loss.toPrecision(4)}`;
}

export function duration(startIso: string | null, endIso: string | null): string {
  if (!startIso || !endIso) return "–";
  const ms = Date.parse(endIso) - Date.parse(startIso);
  if (!Number.isFinite(ms) || ms < 0) return "–";
  if (ms < 1000) return `${ms} ms`;
  return `${(ms / 1000).toFixed(1)} s`;
}

export function statusClass(status: string): string {
  switch (status) {
    case "Succeeded":
      return "status-ok";
    case "Failed":
      return "status-bad";
    case "Running":
    case "Retrying":
      return "status-busy";
    case "Skipped":
    case "Cancelled":
      return "status-muted";
    default:
      return "status-pending";
  }
}
