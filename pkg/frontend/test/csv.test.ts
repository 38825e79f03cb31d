import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  inferBitsPerSymbol,
  parseBerCsv,
  parseExitCsv,
  parseHeffGrid,
  SchemaError,
} from "../src/csv.js";

const fixture = (name: string) =>
  readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf-8");

describe("BER csv parsing", () => {
  it("reads the harness schema", () => {
    const rows = parseBerCsv(fixture("ber_p2.csv"));
    expect(rows.length).toBe(6); // 3 SNRs x 2 detectors
    expect(rows[0].detector).toBe("gamp");
    expect(rows[0].symbols).toBe(3840);
    expect(inferBitsPerSymbol(rows)).toBe(2);
  });

  it("names the missing column", () => {
    const broken = fixture("ber_p2.csv").replace("bit_err", "bits_bad");
    expect(() => parseBerCsv(broken)).toThrowError(/missing column 'bit_err'/);
  });

  it("rejects empty files", () => {
    expect(() => parseBerCsv("")).toThrow(SchemaError);
  });
});

describe("EXIT csv parsing", () => {
  it("reads curve and trajectory rows", () => {
    const rows = parseExitCsv(fixture("exit_10db.csv"));
    const curve = rows.filter((r) => r.iterations === 1);
    const traj = rows.filter((r) => r.iterations > 1);
    expect(curve.length).toBe(12); // 6 grid points x 2 detectors
    expect(traj.length).toBeGreaterThan(0);
    for (const r of rows) {
      expect(r.i_a).toBeGreaterThanOrEqual(0);
      expect(r.i_e).toBeLessThanOrEqual(1);
    }
  });

  it("rejects a header-only file", () => {
    const headerOnly = fixture("exit_10db.csv").split("\n")[0];
    expect(() => parseExitCsv(headerOnly)).toThrowError(/no data rows/);
  });

  it("names the missing column", () => {
    const broken = fixture("exit_10db.csv").replace("i_e", "i_x");
    expect(() => parseExitCsv(broken)).toThrowError(/missing column 'i_e'/);
  });
});

describe("heff grid parsing", () => {
  it("reads the magnitude grid with metadata", () => {
    const grid = parseHeffGrid(fixture("heff_integer.csv"));
    expect(grid.n).toBe(64);
    expect(grid.paths).toBe(2);
    expect(grid.values.length).toBe(64);
    expect(grid.values[0].length).toBe(64);
  });

  it("rejects a foreign header", () => {
    expect(() => parseHeffGrid("1,2,3\n4,5,6\n")).toThrowError(/afdmsim-heff/);
  });

  it("rejects truncated grids", () => {
    const lines = fixture("heff_integer.csv").split("\n").slice(0, 10).join("\n");
    expect(() => parseHeffGrid(lines)).toThrowError(/expected 64 rows/);
  });
});
