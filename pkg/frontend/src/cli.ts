/**
 * plots <ber|exit|heatmap> --in <file> [--in <file> ...] --out <image.svg>
 *
 * Reads the simulator's CSV outputs and writes a deterministic SVG figure.
 * Numbers are never recomputed here; everything plotted comes from the
 * input files.
 */

import { readFileSync, writeFileSync } from "node:fs";
import process from "node:process";

import { buildBerChart } from "./ber.js";
import { buildExitChart } from "./exit.js";
import { buildHeatmap } from "./heatmap.js";
import { BerRow, parseBerCsv, parseExitCsv, parseHeffGrid, SchemaError } from "./csv.js";

function usage(): never {
  console.error("usage: plots <ber|exit|heatmap> --in <file> [--in <file> ...] --out <image.svg>");
  process.exit(2);
}

interface Args {
  kind: string;
  inputs: string[];
  out: string;
}

export function parseArgs(argv: string[]): Args {
  if (argv.length === 0) usage();
  const kind = argv[0];
  const inputs: string[] = [];
  let out = "";
  for (let i = 1; i < argv.length; i++) {
    if (argv[i] === "--in") inputs.push(argv[++i]);
    else if (argv[i] === "--out") out = argv[++i];
    else usage();
  }
  if (!["ber", "exit", "heatmap"].includes(kind) || inputs.length === 0 || !out) usage();
  return { kind, inputs, out };
}

export function render(kind: string, texts: string[]): string {
  if (kind === "ber") {
    const rows: BerRow[] = texts.flatMap(parseBerCsv);
    return buildBerChart(rows);
  }
  if (kind === "exit") {
    return buildExitChart(texts.flatMap(parseExitCsv));
  }
  if (texts.length !== 1) {
    throw new SchemaError("heatmap expects exactly one --in grid file");
  }
  return buildHeatmap(parseHeffGrid(texts[0]));
}

export function main(argv: string[]): number {
  const args = parseArgs(argv);
  let svg: string;
  try {
    svg = render(args.kind, args.inputs.map((p) => readFileSync(p, "utf-8")));
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 1;
    }
    throw err;
  }
  writeFileSync(args.out, svg);
  console.log(`wrote ${args.out}`);
  return 0;
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(main(process.argv.slice(2)));
}
