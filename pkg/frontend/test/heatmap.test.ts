import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { HeffGrid, parseHeffGrid } from "../src/csv.js";
import {
  buildHeatmap,
  entriesAboveThreshold,
  offBandEnergyFraction,
} from "../src/heatmap.js";

const load = (name: string) =>
  parseHeffGrid(readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf-8"));

const integer = load("heff_integer.csv");
const fractional = load("heff_fractional.csv");

describe("heatmap metrics", () => {
  it("integer channel shows at most P bands above -60 dB", () => {
    for (const count of entriesAboveThreshold(integer)) {
      expect(count).toBeLessThanOrEqual(integer.paths);
    }
  });

  it("off-band metric separates integer from fractional channels", () => {
    expect(offBandEnergyFraction(integer)).toBeLessThan(0.01);
    expect(offBandEnergyFraction(fractional)).toBeGreaterThan(0.10);
  });

  it("identity channel concentrates on the diagonal", () => {
    const n = 8;
    const values = Array.from({ length: n }, (_, p) =>
      Array.from({ length: n }, (_, q) => (p === q ? 1.0 : 1e-12)),
    );
    const grid: HeffGrid = { n, paths: 1, beta: 0.4, seed: "0", values };
    const peak = 1.0;
    values.forEach((row, p) =>
      row.forEach((v, q) => {
        if (v > peak * 1e-3) expect(p).toBe(q);
      }),
    );
    expect(entriesAboveThreshold(grid).every((c) => c === 1)).toBe(true);
  });
});

describe("heatmap rendering", () => {
  it("emits one cell per matrix entry and the metric footer", () => {
    const svg = buildHeatmap(integer);
    const cells = svg.match(/<rect x=/g) ?? [];
    expect(cells.length).toBe(integer.n * integer.n + 1); // + border rect
    expect(svg).toContain("off-band energy fraction");
  });

  it("is byte-identical across rebuilds", async () => {
    const first = buildHeatmap(fractional);
    expect(buildHeatmap(fractional)).toBe(first);
    await expect(first).toMatchFileSnapshot("./__snapshots__/heatmap.svg");
  });
});
