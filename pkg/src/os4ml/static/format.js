// Plain-language labels: the UI never surfaces ML jargon for type names.
const TYPE_LABELS = {
    number: "Number",
    category: "Category",
    binary: "Yes / No",
    text: "Text",
};
export function typeLabel(t) {
    return TYPE_LABELS[t] ?? t;
}
export function percent(p) {
    return `${(p * 100).toFixed(1)}%`;
}
export function metricSummary(metrics) {
    if (metrics.accuracy !== undefined && metrics.accuracy !== null) {
        return `Accuracy ${percent(metrics.accuracy)}`;
    }
    if (metrics.mse !== undefined && metrics.mse !== null) {
        return `Mean squared error ${metrics.mse.toPrecision(4)}`;
    }
    return `Loss ${metrics.loss.toPrecision(4)}`;
}
export function duration(startIso, endIso) {
    if (!startIso || !endIso)
        return "–";
    const ms = Date.parse(endIso) - Date.parse(startIso);
    if (!Number.isFinite(ms) || ms < 0)
        return "–";
    if (ms < 1000)
        return `${ms} ms`;
    return `${(ms / 1000).toFixed(1)} s`;
}
export function statusClass(status) {
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
