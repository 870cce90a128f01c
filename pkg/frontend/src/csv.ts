/** Parsing and validation of the experiment harness's coverage.csv schema. */

export interface CoverageRow {
  scenario: string;
  method: string;
  alpha: number;
  tail: string;
  coverage: number;
  coverage_se: number;
  mean_width: number;
  width_se: number;
  replications: number;
  seed: number;
}

export const REQUIRED_COLUMNS = [
  "scenario",
  "method",
  "alpha",
  "tail",
  "coverage",
  "coverage_se",
  "mean_width",
  "width_se",
  "replications",
  "seed",
] as const;

const NUMERIC: ReadonlySet<string> = new Set([
  "alpha",
  "coverage",
  "coverage_se",
  "mean_width",
  "width_se",
  "replications",
  "seed",
]);

export class SchemaError extends Error {
  readonly missing: string[];
  constructor(missing: string[]) {
    super(`coverage CSV is missing required columns: ${missing.join(", ")}`);
    this.missing = missing;
  }
}

/** Parse coverage.csv text; throws SchemaError listing missing columns. */
export function parseCoverageCsv(text: string): CoverageRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new SchemaError([...REQUIRED_COLUMNS]);
  }
  const header = lines[0].split(",").map((c) => c.trim());
  const missing = REQUIRED_COLUMNS.filter((c) => !header.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(missing);
  }
  const index = new Map(header.map((name, i) => [name, i]));
  const rows: CoverageRow[] = [];
  for (let lineNo = 1; lineNo < lines.length; lineNo++) {
    const cells = lines[lineNo].split(",");
    if (cells.length < header.length) {
      throw new Error(`line ${lineNo + 1}: expected ${header.length} cells, got ${cells.length}`);
    }
    const record: Record<string, string | number> = {};
    for (const column of REQUIRED_COLUMNS) {
      const raw = cells[index.get(column)!].trim();
      if (NUMERIC.has(column)) {
        const value = Number(raw);
        if (!Number.isFinite(value)) {
          throw new Error(`line ${lineNo + 1}: non-numeric ${column} value ${JSON.stringify(raw)}`);
        }
        record[column] = value;
      } else {
        record[column] = raw;
      }
    }
    rows.push(record as unknown as CoverageRow);
  }
  return rows;
}

/** Distinct methods in first-appearance order (stable across re-runs). */
export function methodsOf(rows: CoverageRow[]): string[] {
  const seen: string[] = [];
  for (const row of rows) {
    if (!seen.includes(row.method)) {
      seen.push(row.method);
    }
  }
  return seen;
}

/** Ascending distinct alpha grid. */
export function alphasOf(rows: CoverageRow[]): number[] {
  const uniq = [...new Set(rows.map((r) => r.alpha))];
  uniq.sort((a, b) => a - b);
  return uniq;
}
