/**
 * Minimal CSV reader for the solver's output files: one header line,
 * comma-separated, no quoting.
 */

export interface CsvTable {
  header: string[];
  rows: Record<string, string>[];
}

export function parseCsv(text: string): CsvTable {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV");
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new Error(`row ${i + 1}: expected ${header.length} cells, got ${cells.length}`);
    }
    const rec: Record<string, string> = {};
    header.forEach((name, j) => (rec[name] = cells[j]));
    return rec;
  });
  return { header, rows };
}

export function requireColumns(table: CsvTable, names: string[]): void {
  for (const name of names) {
    if (!table.header.includes(name)) {
      throw new Error(`missing column "${name}" (header: ${table.header.join(",")})`);
    }
  }
}
