/**
 * Parsers for the simulator's output files.
 *
 * Three inputs exist: the BER sweep CSV, the EXIT CSV, and the
 * effective-channel magnitude grid written by `afdmsim channel-dump
 * --heff-out`.  Parsing validates the schema up front and reports the
 * first missing column by name.
 */

export class SchemaError extends Error {}

export interface BerRow {
  snr_db: number;
  detector: string;
  paths: number;
  frames: number;
  symbols: number;
  sym_err: number;
  bit_err: number;
  ber: number;
  ser: number;
  mean_iters: number;
  wall_ms: number;
  seed: string;
  config_hash: string;
}

export interface ExitRow {
  detector: string;
  i_a: number;
  i_e: number;
  snr_db: number;
  iterations: number;
  samples: number;
  seed: string;
}

export interface HeffGrid {
  n: number;
  paths: number;
  beta: number;
  seed: string;
  values: number[][]; // |H_eff| magnitudes, row major
}

const BER_COLUMNS = [
  "snr_db", "detector", "paths", "frames", "symbols", "sym_err", "bit_err",
  "ber", "ser", "mean_iters", "wall_ms", "seed", "config_hash",
];
const EXIT_COLUMNS = ["detector", "i_a", "i_e", "snr_db", "iterations", "samples", "seed"];

function splitCsv(text: string): string[][] {
  return text
    .split(/\r?\n/)
    .filter((line) => line.trim().length > 0)
    .map((line) => line.split(","));
}

function indexColumns(header: string[], required: string[], what: string): Map<string, number> {
  const idx = new Map<string, number>();
  header.forEach((name, i) => idx.set(name.trim(), i));
  for (const col of required) {
    if (!idx.has(col)) {
      throw new SchemaError(`${what}: missing column '${col}'`);
    }
  }
  return idx;
}

export function parseBerCsv(text: string): BerRow[] {
  const lines = splitCsv(text);
  if (lines.length === 0) throw new SchemaError("BER csv: empty file");
  const idx = indexColumns(lines[0], BER_COLUMNS, "BER csv");
  return lines.slice(1).map((cells) => {
    const get = (c: string) => cells[idx.get(c)!];
    return {
      snr_db: Number(get("snr_db")),
      detector: get("detector"),
      paths: Number(get("paths")),
      frames: Number(get("frames")),
      symbols: Number(get("symbols")),
      sym_err: Number(get("sym_err")),
      bit_err: Number(get("bit_err")),
      ber: Number(get("ber")),
      ser: Number(get("ser")),
      mean_iters: Number(get("mean_iters")),
      wall_ms: Number(get("wall_ms")),
      seed: get("seed"),
      config_hash: get("config_hash"),
    };
  });
}

export function parseExitCsv(text: string): ExitRow[] {
  const lines = splitCsv(text);
  if (lines.length === 0) throw new SchemaError("EXIT csv: empty file");
  const idx = indexColumns(lines[0], EXIT_COLUMNS, "EXIT csv");
  const rows = lines.slice(1).map((cells) => {
    const get = (c: string) => cells[idx.get(c)!];
    return {
      detector: get("detector"),
      i_a: Number(get("i_a")),
      i_e: Number(get("i_e")),
      snr_db: Number(get("snr_db")),
      iterations: Number(get("iterations")),
      samples: Number(get("samples")),
      seed: get("seed"),
    };
  });
  if (rows.length === 0) throw new SchemaError("EXIT csv: no data rows");
  return rows;
}

export function parseHeffGrid(text: string): HeffGrid {
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0 || !lines[0].startsWith("# afdmsim-heff")) {
    throw new SchemaError("heff grid: missing '# afdmsim-heff' header");
  }
  const meta = new Map<string, string>();
  for (const pair of lines[0].split(/\s+/).slice(2)) {
    const [k, v] = pair.split("=");
    meta.set(k, v);
  }
  for (const key of ["N", "paths", "beta", "seed"]) {
    if (!meta.has(key)) throw new SchemaError(`heff grid: missing header field '${key}'`);
  }
  const n = Number(meta.get("N"));
  const values = lines.slice(1).map((line) => line.split(",").map(Number));
  if (values.length !== n || values.some((row) => row.length !== n)) {
    throw new SchemaError(`heff grid: expected ${n} rows of ${n} magnitudes`);
  }
  return {
    n,
    paths: Number(meta.get("paths")),
    beta: Number(meta.get("beta")),
    seed: meta.get("seed")!,
    values,
  };
}

/** Bits per symbol inferred from the error counts (QPSK fallback). */
export function inferBitsPerSymbol(rows: BerRow[]): number {
  for (const r of rows) {
    if (r.bit_err > 0 && r.ber > 0) {
      return Math.round(r.bit_err / r.ber / r.symbols);
    }
  }
  return 2;
}
