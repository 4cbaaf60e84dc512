import { readFileSync } from "node:fs";
import Papa from "papaparse";

export interface RateRow {
  drop: number;
  ue: number;
  scheme: string;
  model: string;
  rate_bps_hz: number;
  served: number;
}

export interface InpRow {
  drop: number;
  ue: number;
  scheme: string;
  model: string;
  inp_dbw: number;
}

export interface DroppedRow {
  drop: number;
  scheme: string;
  count: number;
}

export interface CdfRow {
  value: number;
  cum_prob: number;
}

/**
 * Read a header CSV into typed rows, checking the required columns exist.
 * Throws with the file path in the message on parse or schema problems.
 */
export function readCsv<T>(path: string, required: string[]): T[] {
  const text = readFileSync(path, "utf8");
  const parsed = Papa.parse<T>(text.trim(), {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new Error(`${path}: ${e.message}${e.row !== undefined ? ` (row ${e.row})` : ""}`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const col of required) {
    if (!fields.includes(col)) {
      throw new Error(`${path}: missing column ${col}`);
    }
  }
  return parsed.data;
}

export const readRates = (path: string) =>
  readCsv<RateRow>(path, ["drop", "ue", "scheme", "model", "rate_bps_hz", "served"]);

export const readInp = (path: string) =>
  readCsv<InpRow>(path, ["drop", "ue", "scheme", "model", "inp_dbw"]);

export const readDropped = (path: string) =>
  readCsv<DroppedRow>(path, ["drop", "scheme", "count"]);

export const readCdf = (path: string) =>
  readCsv<CdfRow>(path, ["value", "cum_prob"]);
