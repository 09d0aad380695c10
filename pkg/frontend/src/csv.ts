/** Strict readers for the two trace formats the experiment runner emits. */

export class SchemaError extends Error {}

export interface Table {
  header: string[];
  columns: Map<string, number[]>;
}

function splitLines(text: string): string[] {
  const lines = text.split("\n");
  // trailing newline leaves one empty tail entry
  if (lines.length && lines[lines.length - 1] === "") lines.pop();
  return lines;
}

/** Wide numeric table: header row, then one float per cell, no gaps. */
export function parseNumericCsv(text: string): Table {
  const lines = splitLines(text);
  if (lines.length < 2) {
    throw new SchemaError("need a header row and at least one data row");
  }
  const header = lines[0]!.split(",");
  if (new Set(header).size !== header.length) {
    throw new SchemaError("duplicate column names");
  }
  const cells = header.map((): number[] => []);
  for (let i = 1; i < lines.length; i++) {
    const row = lines[i]!.split(",");
    if (row.length !== header.length) {
      throw new SchemaError(`row ${i} has ${row.length} cells, expected ${header.length}`);
    }
    for (let j = 0; j < row.length; j++) {
      const v = Number(row[j]);
      if (row[j] === "" || Number.isNaN(v)) {
        throw new SchemaError(`row ${i}, column ${header[j]}: not a number: ${row[j]}`);
      }
      cells[j]!.push(v);
    }
  }
  const columns = new Map<string, number[]>();
  header.forEach((name, j) => columns.set(name, cells[j]!));
  return { header, columns };
}

/** Long sample table: exactly (policy, sample) rows, grouped by policy. */
export function parseSampleCsv(text: string): Map<string, number[]> {
  const lines = splitLines(text);
  if (lines.length < 2) {
    throw new SchemaError("need a header row and at least one data row");
  }
  if (lines[0] !== "policy,sample") {
    throw new SchemaError(`expected header policy,sample, got ${lines[0]}`);
  }
  const groups = new Map<string, number[]>();
  for (let i = 1; i < lines.length; i++) {
    const cut = lines[i]!.lastIndexOf(",");
    if (cut <= 0) throw new SchemaError(`row ${i}: expected policy,sample`);
    const label = lines[i]!.slice(0, cut);
    const v = Number(lines[i]!.slice(cut + 1));
    if (Number.isNaN(v)) {
      throw new SchemaError(`row ${i}: sample is not a number`);
    }
    let arr = groups.get(label);
    if (!arr) {
      arr = [];
      groups.set(label, arr);
    }
    arr.push(v);
  }
  return groups;
}

export function isSampleCsv(text: string): boolean {
  return text.startsWith("policy,sample\n");
}

/** Columns that are derived bookkeeping, not policies to plot. */
const NON_POLICY = new Set(["step", "run_mean", "reduced"]);

export function policyColumns(table: Table): string[] {
  const names = table.header.filter((h) => !NON_POLICY.has(h));
  if (names.length === 0) throw new SchemaError("no policy columns in table");
  return names;
}
