/**
 * Minimal CSV reading for epomc artifacts.
 *
 * Header-row tables: numeric cells, empty fields decode to null (sweep gaps
 * and out-of-domain metrics are written as empty, never as NaN literals).
 * Bare matrices (Wigner surfaces) have no header.
 */

import { readFileSync } from "fs";

export interface Table {
  columns: string[];
  /** column name -> values (null where the field was empty) */
  data: Map<string, (number | null)[]>;
  rows: number;
  /** non-numeric passthrough columns (regime labels, status) */
  text: Map<string, string[]>;
}

export class CsvError extends Error {}

export function readTable(path: string): Table {
  const raw = readFileSync(path, "utf8").trimEnd();
  if (raw === "") throw new CsvError(`empty CSV: ${path}`);
  const lines = raw.split("\n");
  const columns = lines[0].split(",");
  const data = new Map<string, (number | null)[]>();
  const text = new Map<string, string[]>();
  for (const c of columns) {
    data.set(c, []);
    text.set(c, []);
  }
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new CsvError(
        `${path}:${i + 1}: expected ${columns.length} fields, got ${cells.length}`,
      );
    }
    for (let j = 0; j < columns.length; j++) {
      const cell = cells[j];
      text.get(columns[j])!.push(cell);
      if (cell === "") {
        data.get(columns[j])!.push(null);
      } else {
        const v = Number(cell);
        data.get(columns[j])!.push(Number.isFinite(v) ? v : null);
      }
    }
  }
  return { columns, data, rows: lines.length - 1, text };
}

/** Numeric column with a clear error naming the file and column. */
export function column(t: Table, name: string, path: string): (number | null)[] {
  const col = t.data.get(name);
  if (col === undefined) {
    throw new CsvError(`${path}: missing column '${name}' (have: ${t.columns.join(", ")})`);
  }
  return col;
}

/** Column that must not contain gaps (time axes, scan drives). */
export function denseColumn(t: Table, name: string, path: string): number[] {
  const col = column(t, name, path);
  const out: number[] = [];
  for (let i = 0; i < col.length; i++) {
    const v = col[i];
    if (v === null) throw new CsvError(`${path}: column '${name}' has an empty cell at row ${i + 2}`);
    out.push(v);
  }
  return out;
}

/** Bare numeric matrix (no header): rows of comma-separated values. */
export function readMatrix(path: string): number[][] {
  const raw = readFileSync(path, "utf8").trimEnd();
  if (raw === "") throw new CsvError(`empty CSV matrix: ${path}`);
  const rows = raw.split("\n").map((line, i) => {
    const cells = line.split(",").map(Number);
    if (cells.some((v) => !Number.isFinite(v))) {
      throw new CsvError(`${path}:${i + 1}: non-numeric cell in matrix`);
    }
    return cells;
  });
  const width = rows[0].length;
  if (rows.some((r) => r.length !== width)) {
    throw new CsvError(`${path}: ragged matrix`);
  }
  return rows;
}

export interface WignerHeader {
  q_min: number;
  q_max: number;
  n_q: number;
  p_min: number;
  p_max: number;
  n_p: number;
}

export function readWignerHeader(path: string): WignerHeader {
  const doc = JSON.parse(readFileSync(path, "utf8"));
  for (const key of ["q_min", "q_max", "n_q", "p_min", "p_max", "n_p"]) {
    if (typeof doc[key] !== "number") {
      throw new CsvError(`${path}: missing numeric field '${key}'`);
    }
  }
  return doc as WignerHeader;
}
