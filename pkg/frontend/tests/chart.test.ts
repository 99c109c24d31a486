import { describe, expect, it } from "vitest";

import { decimate, MAX_POINTS } from "../src/chart.js";

function series(n: number): number[] {
  const out = new Array<number>(n);
  for (let i = 0; i < n; i++) {
    out[i] = Math.sin((2 * Math.PI * 1.7 * i) / 50) + 0.001 * i;
  }
  return out;
}

describe("decimate", () => {
  it("passes short series through unchanged", () => {
    const values = series(500);
    const points = decimate(values, 50);
    expect(points).toHaveLength(500);
    expect(points.map((p) => p.v)).toEqual(values);
    expect(points[1]!.t).toBeCloseTo(1 / 50, 12);
    expect(points[499]!.t).toBeCloseTo(499 / 50, 12);
  });

  it("caps long series at the point budget", () => {
    for (const n of [2001, 5000, 60000, 123457]) {
      const points = decimate(series(n), 50);
      expect(points.length).toBeLessThanOrEqual(MAX_POINTS);
      expect(points.length).toBeGreaterThan(MAX_POINTS / 2);
    }
  });

  it("keeps the global extremes (min/max binning, not striding)", () => {
    const values = series(50000);
    // Hide a one-sample spike in each direction where plain striding
    // would drop it.
    values[31337] = 500;
    values[7411] = -500;
    const points = decimate(values, 50);
    const vs = points.map((p) => p.v);
    expect(Math.max(...vs)).toBe(500);
    expect(Math.min(...vs)).toBe(-500);
    // The spike keeps its true time coordinate too.
    const spike = points.find((p) => p.v === 500)!;
    expect(spike.t).toBeCloseTo(31337 / 50, 9);
  });

  it("emits points in nondecreasing time order", () => {
    const points = decimate(series(44100), 100);
    for (let i = 1; i < points.length; i++) {
      expect(points[i]!.t).toBeGreaterThanOrEqual(points[i - 1]!.t);
    }
  });

  it("honors a custom budget", () => {
    const points = decimate(series(10000), 50, 100);
    expect(points.length).toBeLessThanOrEqual(100);
  });
});
