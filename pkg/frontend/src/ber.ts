/**
 * Semilog BER chart: one curve per (detector, path count) group; rows with
 * zero bit errors render at the floor 1/(total bits) instead of being
 * dropped, marked with an open symbol.
 */

import { BerRow, inferBitsPerSymbol } from "./csv.js";
import {
  HEIGHT, MARGIN, WIDTH, decadeScale, detectorColor, fmt, line, linearScale,
  marker, polyline, text,
} from "./svg.js";
import { document as svgDocument } from "./svg.js";

interface Curve {
  detector: string;
  paths: number;
  points: Array<{ snr: number; ber: number; floored: boolean }>;
}

export function buildBerChart(rows: BerRow[]): string {
  if (rows.length === 0) throw new Error("BER chart: no rows");
  const bps = inferBitsPerSymbol(rows);

  const groups = new Map<string, Curve>();
  for (const r of rows) {
    const key = `${r.detector}|${r.paths}`;
    if (!groups.has(key)) groups.set(key, { detector: r.detector, paths: r.paths, points: [] });
    const floor = 1 / (r.symbols * bps);
    groups.get(key)!.points.push({
      snr: r.snr_db,
      ber: r.ber > 0 ? r.ber : floor,
      floored: r.ber <= 0,
    });
  }
  const curves = [...groups.values()].sort(
    (a, b) => a.detector.localeCompare(b.detector) || a.paths - b.paths,
  );
  curves.forEach((c) => c.points.sort((p, q) => p.snr - q.snr));

  const allSnr = rows.map((r) => r.snr_db);
  const allBer = curves.flatMap((c) => c.points.map((p) => p.ber));
  const loExp = Math.floor(Math.log10(Math.min(...allBer)));
  const hiExp = Math.ceil(Math.log10(Math.max(...allBer, 1e-12)));

  const x = linearScale(Math.min(...allSnr), Math.max(...allSnr),
    MARGIN.left, WIDTH - MARGIN.right);
  const { scale: yOf, ticks: yTicks } = decadeScale(
    loExp, Math.max(hiExp, loExp + 1), HEIGHT - MARGIN.bottom, MARGIN.top,
  );

  const body: string[] = [];
  const axisAttrs = 'stroke="#222" stroke-width="1"';
  body.push(line(MARGIN.left, MARGIN.top, MARGIN.left, HEIGHT - MARGIN.bottom, axisAttrs));
  body.push(line(MARGIN.left, HEIGHT - MARGIN.bottom, WIDTH - MARGIN.right,
    HEIGHT - MARGIN.bottom, axisAttrs));
  for (const t of x.ticks) {
    body.push(line(x(t), HEIGHT - MARGIN.bottom, x(t), HEIGHT - MARGIN.bottom + 4, axisAttrs));
    body.push(text(x(t), HEIGHT - MARGIN.bottom + 18, `${t}`,
      'text-anchor="middle" font-size="11"'));
  }
  for (const t of yTicks) {
    const y = yOf(t);
    body.push(line(MARGIN.left - 4, y, MARGIN.left, y, axisAttrs));
    body.push(line(MARGIN.left, y, WIDTH - MARGIN.right, y,
      'stroke="#ddd" stroke-width="0.5"'));
    const exp = Math.round(Math.log10(t));
    body.push(text(MARGIN.left - 8, y + 4, `1e${exp}`,
      'text-anchor="end" font-size="11"'));
  }
  body.push(text((MARGIN.left + WIDTH - MARGIN.right) / 2, HEIGHT - MARGIN.bottom + 36,
    "SNR (dB)", 'text-anchor="middle" font-size="12"'));
  body.push(`<g transform="translate(18,${fmt((MARGIN.top + HEIGHT - MARGIN.bottom) / 2)}) rotate(-90)">`
    + text(0, 0, "BER", 'text-anchor="middle" font-size="12"') + `</g>`);

  const dashForPaths = (paths: number) => (paths <= 2 ? "" : 'stroke-dasharray="6,3" ');
  curves.forEach((curve) => {
    const color = detectorColor(curve.detector);
    const pts: Array<[number, number]> = curve.points.map((p) => [x(p.snr), yOf(p.ber)]);
    body.push(polyline(pts,
      `fill="none" stroke="${color}" stroke-width="1.5" ${dashForPaths(curve.paths)}`));
    curve.points.forEach((p) => {
      if (p.floored) {
        body.push(`<circle cx="${fmt(x(p.snr))}" cy="${fmt(yOf(p.ber))}" r="3.5" `
          + `fill="white" stroke="${color}" stroke-width="1.2"/>`);
      } else {
        body.push(marker(x(p.snr), yOf(p.ber), curve.paths <= 2 ? "circle" : "square", color));
      }
    });
  });

  let ly = MARGIN.top + 8;
  curves.forEach((curve) => {
    const color = detectorColor(curve.detector);
    body.push(line(WIDTH - MARGIN.right - 150, ly - 4, WIDTH - MARGIN.right - 120, ly - 4,
      `stroke="${color}" stroke-width="1.5" ${dashForPaths(curve.paths)}`));
    body.push(text(WIDTH - MARGIN.right - 114, ly, `${curve.detector}, P=${curve.paths}`,
      'font-size="11"'));
    ly += 16;
  });

  const seeds = [...new Set(rows.map((r) => r.seed))].join(",");
  const hashes = [...new Set(rows.map((r) => r.config_hash))].join(",");
  body.push(text(MARGIN.left, HEIGHT - 12,
    `seed ${seeds}  config ${hashes}  floor 1/(symbols*${bps})`,
    'font-size="9" fill="#666"'));

  return svgDocument(body, "BER vs SNR");
}
