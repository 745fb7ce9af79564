import * as fs from "fs";
import Papa from "papaparse";

export class SchemaError extends Error {}

export type Row = Record<string, string>;

/** Parse a CSV file and fail loudly, by column name, on schema drift. */
export function readCsv(path: string, requiredColumns: string[]): Row[] {
  if (!fs.existsSync(path)) throw new SchemaError(`input file not found: ${path}`);
  const text = fs.readFileSync(path, "utf8");
  const parsed = Papa.parse<Row>(text.trim(), { header: true, skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`malformed CSV ${path}: ${parsed.errors[0].message}`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const col of requiredColumns) {
    if (!fields.includes(col)) {
      throw new SchemaError(`missing column '${col}' in ${path}`);
    }
  }
  return parsed.data;
}

export function num(row: Row, col: string): number {
  const v = Number(row[col]);
  if (!isFinite(v)) throw new SchemaError(`non-numeric value '${row[col]}' in column '${col}'`);
  return v;
}

export function readJson(path: string): unknown {
  if (!fs.existsSync(path)) throw new SchemaError(`input file not found: ${path}`);
  return JSON.parse(fs.readFileSync(path, "utf8"));
}
