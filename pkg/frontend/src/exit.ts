/**
 * EXIT chart: per-detector transfer curves (iterations == 1 rows) plus the
 * chained free-running staircase (iterations > 1 rows) against the
 * diagonal.
 */

import { ExitRow } from "./csv.js";
import {
  HEIGHT, MARGIN, WIDTH, detectorColor, line, linearScale, marker, polyline,
  text, document as svgDocument,
} from "./svg.js";

export interface Staircase {
  detector: string;
  /** (i_a, i_e) pairs in iteration order, i_a(t+1) = i_e(t). */
  steps: Array<[number, number]>;
}

/** Chained free-running trajectories.  Rows start at iteration 2; iteration
 * 1 ran from a uniform prior, so its output is the first row's i_a and the
 * initial riser (0, i_a_first) is prepended here. */
export function staircases(rows: ExitRow[]): Staircase[] {
  const out: Staircase[] = [];
  for (const det of [...new Set(rows.map((r) => r.detector))].sort()) {
    const traj = rows
      .filter((r) => r.detector === det && r.iterations > 1)
      .sort((a, b) => a.iterations - b.iterations);
    if (traj.length > 0) {
      const steps: Array<[number, number]> = [[0, traj[0].i_a]];
      steps.push(...traj.map((r): [number, number] => [r.i_a, r.i_e]));
      out.push({ detector: det, steps });
    }
  }
  return out;
}

export function curvePoints(rows: ExitRow[], detector: string): Array<[number, number]> {
  return rows
    .filter((r) => r.detector === detector && r.iterations === 1)
    .sort((a, b) => a.i_a - b.i_a)
    .map((r) => [r.i_a, r.i_e]);
}

/** Last trajectory i_e per detector: the empirical fixed point. */
export function fixedPoint(rows: ExitRow[], detector: string): number | null {
  const traj = rows
    .filter((r) => r.detector === detector && r.iterations > 1)
    .sort((a, b) => a.iterations - b.iterations);
  return traj.length > 0 ? traj[traj.length - 1].i_e : null;
}

export function buildExitChart(rows: ExitRow[]): string {
  if (rows.length === 0) throw new Error("EXIT chart: no rows");
  const detectors = [...new Set(rows.map((r) => r.detector))].sort();
  const x = linearScale(0, 1, MARGIN.left, WIDTH - MARGIN.right, 6);
  const yLin = linearScale(0, 1, HEIGHT - MARGIN.bottom, MARGIN.top, 6);

  const body: string[] = [];
  const axisAttrs = 'stroke="#222" stroke-width="1"';
  body.push(line(MARGIN.left, MARGIN.top, MARGIN.left, HEIGHT - MARGIN.bottom, axisAttrs));
  body.push(line(MARGIN.left, HEIGHT - MARGIN.bottom, WIDTH - MARGIN.right,
    HEIGHT - MARGIN.bottom, axisAttrs));
  for (const t of x.ticks) {
    body.push(line(x(t), HEIGHT - MARGIN.bottom, x(t), HEIGHT - MARGIN.bottom + 4, axisAttrs));
    body.push(text(x(t), HEIGHT - MARGIN.bottom + 18, t.toFixed(1),
      'text-anchor="middle" font-size="11"'));
    body.push(line(MARGIN.left - 4, yLin(t), MARGIN.left, yLin(t), axisAttrs));
    body.push(text(MARGIN.left - 8, yLin(t) + 4, t.toFixed(1),
      'text-anchor="end" font-size="11"'));
  }
  body.push(text((MARGIN.left + WIDTH - MARGIN.right) / 2, HEIGHT - MARGIN.bottom + 36,
    "I_A", 'text-anchor="middle" font-size="12"'));
  body.push(`<g transform="translate(18,${(MARGIN.top + HEIGHT - MARGIN.bottom) / 2}) rotate(-90)">`
    + text(0, 0, "I_E", 'text-anchor="middle" font-size="12"') + `</g>`);

  // diagonal I_E = I_A (the chaining line when no outer decoder is present)
  body.push(line(x(0), yLin(0), x(1), yLin(1), 'stroke="#999" stroke-dasharray="4,4"'));

  for (const det of detectors) {
    const color = detectorColor(det);
    const pts = curvePoints(rows, det);
    if (pts.length > 0) {
      body.push(polyline(pts.map(([a, e]) => [x(a), yLin(e)]),
        `fill="none" stroke="${color}" stroke-width="1.8"`));
      pts.forEach(([a, e]) => body.push(marker(x(a), yLin(e), "circle", color)));
    }
  }

  // free-running staircases, drawn rise-at-i_a then across to the diagonal
  for (const stair of staircases(rows)) {
    const segs: Array<[number, number]> = [[x(stair.steps[0][0]), yLin(stair.steps[0][0])]];
    for (const [ia, ie] of stair.steps) {
      segs.push([x(ia), yLin(ie)]);
      segs.push([x(ie), yLin(ie)]);
    }
    body.push(polyline(segs,
      `fill="none" stroke="${detectorColor(stair.detector)}" stroke-width="1" stroke-dasharray="2,2"`));
  }

  let ly = MARGIN.top + 8;
  for (const det of detectors) {
    const color = detectorColor(det);
    body.push(line(WIDTH - MARGIN.right - 150, ly - 4, WIDTH - MARGIN.right - 120, ly - 4,
      `stroke="${color}" stroke-width="1.8"`));
    body.push(text(WIDTH - MARGIN.right - 114, ly, det, 'font-size="11"'));
    ly += 16;
  }
  const snr = [...new Set(rows.map((r) => r.snr_db))].join(",");
  const seeds = [...new Set(rows.map((r) => r.seed))].join(",");
  body.push(text(MARGIN.left, HEIGHT - 12, `SNR ${snr} dB  seed ${seeds}`,
    'font-size="9" fill="#666"'));
  return svgDocument(body, "EXIT chart");
}
