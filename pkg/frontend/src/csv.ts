/**
 * Reader for walklab CSV outputs: one optional `# key=value ...` meta
 * line, a header row, then numeric rows (booleans arrive as 0/1).
 */

import * as fs from "fs";

export interface CsvTable {
  meta: Record<string, string>;
  columns: string[];
  rows: number[][];
}

export function readCsv(path: string, required: string[] = []): CsvTable {
  if (!fs.existsSync(path)) {
    throw new Error(`input file not found: ${path}`);
  }
  const lines = fs
    .readFileSync(path, "utf8")
    .split("\n")
    .filter((l) => l.trim().length > 0);
  const meta: Record<string, string> = {};
  let i = 0;
  if (lines.length > 0 && lines[0].startsWith("#")) {
    for (const tok of lines[0].slice(1).trim().split(/\s+/)) {
      const eq = tok.indexOf("=");
      if (eq > 0) meta[tok.slice(0, eq)] = tok.slice(eq + 1);
    }
    i = 1;
  }
  if (i >= lines.length) {
    throw new Error(`CSV ${path} has no header row`);
  }
  const columns = lines[i].split(",");
  for (const name of required) {
    if (!columns.includes(name)) {
      throw new Error(`missing column '${name}' in ${path} (found: ${columns.join(", ")})`);
    }
  }
  const rows: number[][] = [];
  for (const line of lines.slice(i + 1)) {
    const parts = line.split(",");
    if (parts.length !== columns.length) {
      throw new Error(`ragged CSV row in ${path}: ${line}`);
    }
    rows.push(parts.map((p) => (p === "" ? NaN : Number(p))));
  }
  if (rows.length === 0) {
    throw new Error(`CSV ${path} has no data rows`);
  }
  return { meta, columns, rows };
}

export function column(table: CsvTable, name: string): number[] {
  const j = table.columns.indexOf(name);
  if (j < 0) throw new Error(`missing column '${name}'`);
  return table.rows.map((r) => r[j]);
}

export function readJson(path: string): any {
  if (!fs.existsSync(path)) {
    throw new Error(`input file not found: ${path}`);
  }
  return JSON.parse(fs.readFileSync(path, "utf8"));
}
