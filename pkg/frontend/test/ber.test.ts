import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { buildBerChart } from "../src/ber.js";
import { parseBerCsv } from "../src/csv.js";
import { DETECTOR_COLORS } from "../src/svg.js";

const fixture = (name: string) =>
  readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf-8");

const rows = [
  ...parseBerCsv(fixture("ber_p2.csv")),
  ...parseBerCsv(fixture("ber_p4.csv")),
];

describe("BER chart", () => {
  it("draws one curve per detector/path-count group", () => {
    const svg = buildBerChart(rows);
    const curves = svg.match(/<polyline[^>]*stroke-width="1.5"/g) ?? [];
    expect(curves.length).toBe(4); // 2 detectors x 2 path counts
    expect(svg).toContain(DETECTOR_COLORS["mb-uamp"]);
    expect(svg).toContain(DETECTOR_COLORS["gamp"]);
    expect(svg).toContain("mb-uamp, P=2");
    expect(svg).toContain("gamp, P=4");
  });

  it("renders zero-error rows at the floor instead of dropping them", () => {
    const zeroRows = rows.filter((r) => r.bit_err === 0);
    expect(zeroRows.length).toBeGreaterThan(0); // fixture includes 14 dB zeros
    const svg = buildBerChart(rows);
    const floored = svg.match(/fill="white" stroke="#/g) ?? [];
    expect(floored.length).toBe(zeroRows.length);
    expect(svg).toContain("floor 1/(symbols*2)");
  });

  it("stamps seed and config hash in the footer", () => {
    const svg = buildBerChart(rows);
    expect(svg).toMatch(/seed 22,24/);
    expect(svg).toMatch(/config [0-9a-f]{12}/);
  });

  it("is byte-identical across rebuilds from the same CSVs", async () => {
    const first = buildBerChart(rows);
    const second = buildBerChart(rows);
    expect(second).toBe(first);
    await expect(first).toMatchFileSnapshot("./__snapshots__/ber.svg");
  });
});
