import { readFileSync } from "node:fs";

/** A parsed CSV file: one header row plus string-valued data rows. */
export interface Table {
  header: string[];
  rows: string[][];
}

/**
 * Parse CSV text with a header row. The simulator's writers never quote or
 * escape fields, so a plain comma split is exact.
 */
export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV: no header row");
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line, k) => {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new Error(
        `CSV row ${k + 1} has ${cells.length} cells, expected ${header.length}`,
      );
    }
    return cells;
  });
  return { header, rows };
}

export function readTable(path: string): Table {
  return parseCsv(readFileSync(path, "utf-8"));
}

/** Index of a required column, with a descriptive failure if absent. */
export function columnIndex(table: Table, name: string): number {
  const k = table.header.indexOf(name);
  if (k < 0) {
    throw new Error(
      `missing column "${name}" (header: ${table.header.join(",")})`,
    );
  }
  return k;
}

/**
 * Numeric values of one column. Empty cells become NaN so gaps in a series
 * (e.g. a residual undefined at the first record) survive as skippable points.
 */
export function numericColumn(table: Table, name: string): number[] {
  const k = columnIndex(table, name);
  return table.rows.map((r) => (r[k] === "" ? NaN : Number(r[k])));
}
