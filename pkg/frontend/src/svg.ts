/**
 * Minimal deterministic SVG construction.
 *
 * All coordinates go through fmt() so identical inputs always serialize to
 * identical bytes, which the snapshot tests rely on.
 */

export const WIDTH = 640;
export const HEIGHT = 440;
export const MARGIN = { top: 40, right: 24, bottom: 74, left: 70 };

export function fmt(v: number): string {
  if (!Number.isFinite(v)) throw new Error(`non-finite coordinate: ${v}`);
  const s = v.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

export function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export interface LinearScale {
  (v: number): number;
  ticks: number[];
}

export function linearScale(
  lo: number, hi: number, rangeLo: number, rangeHi: number, tickCount = 6,
): LinearScale {
  const span = hi - lo || 1;
  const scale = ((v: number) => rangeLo + ((v - lo) / span) * (rangeHi - rangeLo)) as LinearScale;
  const step = niceStep(span / Math.max(tickCount - 1, 1));
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12; t += step) {
    ticks.push(Number(t.toFixed(10)));
  }
  scale.ticks = ticks;
  return scale;
}

function niceStep(raw: number): number {
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const frac = raw / mag;
  if (frac <= 1) return mag;
  if (frac <= 2) return 2 * mag;
  if (frac <= 5) return 5 * mag;
  return 10 * mag;
}

/** Log10 scale over exact decades for BER axes. */
export function decadeScale(loExp: number, hiExp: number, rangeLo: number, rangeHi: number) {
  const scale = (v: number) =>
    rangeLo + ((Math.log10(v) - loExp) / (hiExp - loExp)) * (rangeHi - rangeLo);
  const ticks: number[] = [];
  for (let e = hiExp; e >= loExp; e--) ticks.push(Math.pow(10, e));
  return { scale, ticks };
}

export function polyline(points: Array<[number, number]>, attrs: string): string {
  const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return `<polyline points="${pts}" ${attrs}/>`;
}

export function line(x1: number, y1: number, x2: number, y2: number, attrs: string): string {
  return `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ${attrs}/>`;
}

export function text(x: number, y: number, content: string, attrs = ""): string {
  return `<text x="${fmt(x)}" y="${fmt(y)}" ${attrs}>${esc(content)}</text>`;
}

export function marker(x: number, y: number, kind: "circle" | "square", color: string): string {
  if (kind === "circle") {
    return `<circle cx="${fmt(x)}" cy="${fmt(y)}" r="3" fill="${color}"/>`;
  }
  return `<rect x="${fmt(x - 3)}" y="${fmt(y - 3)}" width="6" height="6" fill="${color}"/>`;
}

export function document(body: string[], title: string): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    text(WIDTH / 2, 22, title, 'text-anchor="middle" font-size="15"'),
    ...body,
    `</svg>`,
    ``,
  ].join("\n");
}

/** Fixed per-detector styling so regenerated figures are stable. */
export const DETECTOR_COLORS: Record<string, string> = {
  "mb-uamp": "#1f77b4",
  gamp: "#d62728",
};

export function detectorColor(name: string): string {
  return DETECTOR_COLORS[name] ?? "#555555";
}
