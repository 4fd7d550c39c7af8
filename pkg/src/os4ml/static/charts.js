// Dependency-free SVG line chart for the loss-per-epoch curve.
export function lossChartSvg(losses, width = 420, height = 120) {
    if (losses.length === 0) {
        return `<svg class="loss-chart" viewBox="0 0 ${width} ${height}"></svg>`;
    }
    const pad = 8;
    const lo = Math.min(...losses);
    const hi = Math.max(...losses);
    const span = hi - lo || 1;
    const innerW = width - 2 * pad;
    const innerH = height - 2 * pad;
    const step = losses.length > 1 ? innerW / (losses.length - 1) : 0;
    const points = losses
        .map((loss, i) => {
        const x = pad + i * step;
        const y = pad + innerH * (1 - (loss - lo) / span);
        return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
        .join(" ");
    return (`<svg class="loss-chart" viewBox="0 0 ${width} ${height}" role="img" ` +
        `aria-label="training loss per epoch">` +
        `<polyline fill="none" stroke="currentColor" stroke-width="2" points="${points}"/>` +
        `<title>loss: ${hi.toPrecision(4)} → ${losses[losses.length - 1].toPrecision(4)}</title>` +
        `</svg>`);
}
export function probabilityBars(probabilities) {
    return Object.entries(probabilities)
        .map(([label, p]) => ({ label, pct: p * 100 }))
        .sort((a, b) => b.pct - a.pct);
}
