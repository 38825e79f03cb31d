/**
 * Effective-channel magnitude heatmap on a dB scale.  Integer delay-Doppler
 * channels show at most P sharp bands; fractional Doppler smears energy
 * across the plane, quantified by the off-band energy fraction (the same
 * per-row top-P metric the simulator uses).
 */

import { HeffGrid } from "./csv.js";
import { fmt, text, document as svgDocument } from "./svg.js";

export const DB_FLOOR = -60;

/** Fraction of total energy outside each row's P largest entries. */
export function offBandEnergyFraction(grid: HeffGrid): number {
  let off = 0;
  let total = 0;
  for (const row of grid.values) {
    const powers = row.map((v) => v * v).sort((a, b) => b - a);
    for (let i = 0; i < powers.length; i++) {
      total += powers[i];
      if (i >= grid.paths) off += powers[i];
    }
  }
  return total > 0 ? off / total : 0;
}

/** Per-row count of entries above `relDb` relative to the global peak. */
export function entriesAboveThreshold(grid: HeffGrid, relDb = DB_FLOOR): number[] {
  const peak = Math.max(...grid.values.map((row) => Math.max(...row)));
  const cut = peak * Math.pow(10, relDb / 20);
  return grid.values.map((row) => row.filter((v) => v > cut).length);
}

function grey(mag: number, peak: number): string {
  const db = 20 * Math.log10(Math.max(mag, 1e-300) / peak);
  const u = Math.min(Math.max((db - DB_FLOOR) / -DB_FLOOR, 0), 1); // 0 at floor, 1 at peak
  const level = Math.round(255 * (1 - u));
  const hex = level.toString(16).padStart(2, "0");
  return `#${hex}${hex}${hex}`;
}

export function buildHeatmap(grid: HeffGrid): string {
  const size = 384;
  const cell = size / grid.n;
  const x0 = 120;
  const y0 = 36;
  const peak = Math.max(...grid.values.map((row) => Math.max(...row)));
  const body: string[] = [];
  for (let p = 0; p < grid.n; p++) {
    for (let q = 0; q < grid.n; q++) {
      body.push(
        `<rect x="${fmt(x0 + q * cell)}" y="${fmt(y0 + p * cell)}" ` +
        `width="${fmt(cell)}" height="${fmt(cell)}" fill="${grey(grid.values[p][q], peak)}"/>`,
      );
    }
  }
  body.push(`<rect x="${fmt(x0)}" y="${fmt(y0)}" width="${fmt(size)}" height="${fmt(size)}" `
    + `fill="none" stroke="#222"/>`);
  const frac = offBandEnergyFraction(grid);
  body.push(text(x0, y0 + size + 18,
    `N=${grid.n}  paths=${grid.paths}  beta=${grid.beta}  seed=${grid.seed}`,
    'font-size="10" fill="#444"'));
  body.push(text(x0, y0 + size + 32,
    `off-band energy fraction (top-${grid.paths} per row): ${frac.toFixed(4)}`,
    'font-size="10" fill="#444"'));
  body.push(text(x0 + size / 2, y0 + size + 18, "", ""));
  return svgDocument(body, "|H_eff| magnitude (dB, floor -60)");
}
