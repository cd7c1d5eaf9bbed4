/**
 * Reader for the simulator's self-describing CSV files: `#`-prefixed
 * `key = value` provenance lines, one header row, numeric cells.
 */

import { readFileSync } from "node:fs";

export interface Table {
  meta: Record<string, string>;
  columns: string[];
  /** row-major cells; numeric where parseable, raw string otherwise */
  rows: (number | string)[][];
}

export function parseCsv(text: string): Table {
  const meta: Record<string, string> = {};
  const columns: string[] = [];
  const rows: (number | string)[][] = [];

  for (const raw of text.split(/\r?\n/)) {
    const line = raw.trim();
    if (line.length === 0) continue;
    if (line.startsWith("#")) {
      const body = line.slice(1).trim();
      const eq = body.indexOf("=");
      if (eq > 0) meta[body.slice(0, eq).trim()] = body.slice(eq + 1).trim();
      continue;
    }
    const cells = line.split(",");
    if (columns.length === 0) {
      columns.push(...cells.map((c) => c.trim()));
      continue;
    }
    rows.push(
      cells.map((c) => {
        const v = Number(c);
        return c.trim() !== "" && Number.isFinite(v) ? v : c.trim();
      }),
    );
  }
  if (columns.length === 0) throw new Error("empty CSV: no header row found");
  return { meta, columns, rows };
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, "utf8"));
}

/** Numeric column by name; throws naming the file's columns when absent. */
export function column(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new Error(
      `missing column '${name}' (have: ${table.columns.join(", ")})`,
    );
  }
  return table.rows.map((row) => {
    const v = row[idx];
    if (typeof v !== "number") throw new Error(`non-numeric cell in column '${name}': ${v}`);
    return v;
  });
}

/** String column by name (for the `state` column of ensemble files). */
export function textColumn(table: Table, name: string): string[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new Error(
      `missing column '${name}' (have: ${table.columns.join(", ")})`,
    );
  }
  return table.rows.map((row) => String(row[idx]));
}
