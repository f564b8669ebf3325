/**
 * Reader for the toolkit's CSV artifacts.
 *
 * Every file may start with a `# {...}` comment carrying the generating
 * configuration; the first non-comment line is the column header.
 */

export interface CsvTable {
  config: Record<string, unknown> | null;
  columns: string[];
  rows: string[][];
}

export class SchemaError extends Error {
  constructor(
    message: string,
    readonly missing: string[],
    readonly found: string[],
  ) {
    super(message);
    this.name = 'SchemaError';
  }
}

export function parseCsv(text: string): CsvTable {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  let config: Record<string, unknown> | null = null;
  let start = 0;
  if (lines.length > 0 && lines[0].startsWith('#')) {
    const raw = lines[0].replace(/^#\s*/, '');
    try {
      config = JSON.parse(raw);
    } catch {
      config = null; // tolerate non-JSON comments
    }
    start = 1;
  }
  if (lines.length <= start) {
    throw new Error('empty CSV: no header row');
  }
  const columns = lines[start].split(',').map((c) => c.trim());
  const rows = lines.slice(start + 1).map((line) => line.split(','));
  return { config, columns, rows };
}

/** Ensure required columns exist; reports the exact column diff. */
export function requireColumns(table: CsvTable, required: string[]): void {
  const missing = required.filter((c) => !table.columns.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(
      `input schema mismatch: missing column(s) [${missing.join(', ')}], ` +
        `found [${table.columns.join(', ')}]`,
      missing,
      table.columns,
    );
  }
}

export function column(table: CsvTable, name: string): string[] {
  const idx = table.columns.indexOf(name);
  return table.rows.map((r) => r[idx] ?? '');
}

export function numericColumn(table: CsvTable, name: string): number[] {
  return column(table, name).map((v) => Number.parseFloat(v));
}
