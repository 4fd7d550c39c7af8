import { describe, expect, it } from "vitest";

import { duration, metricSummary, percent, statusClass, typeLabel } from "../src/format.js";

describe("typeLabel", () => {
  it("uses plain language, never jargon", () => {
    expect(typeLabel("number")).toBe("Number");
    expect(typeLabel("category")).toBe("Category");
    expect(typeLabel("binary")).toBe("Yes / No");
    expect(typeLabel("text")).toBe("Text");
  });
});

describe("percent", () => {
  it("renders one decimal", () => {
    expect(percent(0.5)).toBe("50.0%");
    expect(percent(0.987)).toBe("98.7%");
    expect(percent(1)).toBe("100.0%");
  });
});

describe("metricSummary", () => {
  it("prefers accuracy for classification", () => {
    expect(metricSummary({ loss: 0.3, accuracy: 0.95 })).toBe("Accuracy 95.0%");
  });
  it("falls back to mse for regression", () => {
    expect(metricSummary({ loss: 0.25, mse: 0.25 })).toContain("Mean squared error");
  });
});

describe("duration", () => {
  it("formats milliseconds and seconds", () => {
    expect(duration("2026-01-01T00:00:00+00:00", "2026-01-01T00:00:00.250+00:00")).toBe("250 ms");
    expect(duration("2026-01-01T00:00:00+00:00", "2026-01-01T00:00:02.500+00:00")).toBe("2.5 s");
  });
  it("dashes when incomplete", () => {
    expect(duration(null, "2026-01-01T00:00:00+00:00")).toBe("–");
    expect(duration("2026-01-01T00:00:00+00:00", null)).toBe("–");
  });
});

describe("statusClass", () => {
  it("maps statuses to style classes", () => {
    expect(statusClass("Succeeded")).toBe("status-ok");
    expect(statusClass("Failed")).toBe("status-bad");
    expect(statusClass("Running")).toBe("status-busy");
    expect(statusClass("Retrying")).toBe("status-busy");
    expect(statusClass("Skipped")).toBe("status-muted");
    expect(statusClass("Pending")).toBe("status-pending");
  });
});
