/** Numeric matrices and their CSV wire format (17 significant digits). */

export class DatasetError extends Error {}

/**
 * Immutable wrapper around a rectangular matrix of finite doubles.
 * Rows are copied on construction, so later binding calls can never
 * observe or cause mutation of the caller's arrays.
 */
export class BoundDataset {
  readonly rows: number;
  readonly cols: number;
  readonly names: readonly string[];
  private readonly data: Float64Array;

  constructor(values: readonly (readonly number[])[], names?: readonly string[]) {
    if (values.length === 0 || values[0].length === 0) {
      throw new DatasetError("dataset must be at least 1x1");
    }
    this.rows = values.length;
    this.cols = values[0].length;
    this.data = new Float64Array(this.rows * this.cols);
    for (let i = 0; i < this.rows; i++) {
      const row = values[i];
      if (row.length !== this.cols) {
        throw new DatasetError(`ragged row ${i}: expected ${this.cols} cells, got ${row.length}`);
      }
      for (let j = 0; j < this.cols; j++) {
        const v = row[j];
        if (typeof v !== "number" || !Number.isFinite(v)) {
          throw new DatasetError(`non-finite value at row ${i} col ${j}`);
        }
        this.data[i * this.cols + j] = v;
      }
    }
    const resolved = names ? [...names] : [...Array(this.cols)].map((_, j) => `c${j}`);
    if (resolved.length !== this.cols) {
      throw new DatasetError(`${resolved.length} column names for ${this.cols} columns`);
    }
    if (new Set(resolved).size !== this.cols || resolved.some((s) => s.length === 0)) {
      throw new DatasetError("column names must be unique and non-empty");
    }
    this.names = resolved;
  }

  at(i: number, j: number): number {
    return this.data[i * this.cols + j];
  }

  toMatrix(): number[][] {
    const out: number[][] = [];
    for (let i = 0; i < this.rows; i++) {
      out.push(Array.from(this.data.subarray(i * this.cols, (i + 1) * this.cols)));
    }
    return out;
  }

  /** CSV with a header line; cells round-trip doubles exactly. */
  toCsv(): string {
    const lines = [this.names.join(",")];
    for (let i = 0; i < this.rows; i++) {
      const cells: string[] = [];
      for (let j = 0; j < this.cols; j++) {
        cells.push(formatCell(this.data[i * this.cols + j]));
      }
      lines.push(cells.join(","));
    }
    return lines.join("\n") + "\n";
  }
}

/** 17 significant digits guarantee bit round-trip through the CSV. */
export function formatCell(v: number): string {
  return v.toPrecision(17);
}

export function asDataset(data: BoundDataset | readonly (readonly number[])[]): BoundDataset {
  return data instanceof BoundDataset ? data : new BoundDataset(data);
}

/** Parse the primary component's CSV output (single header line). */
export function parseCsv(text: string): { names: string[]; values: number[][] } {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length < 2) {
    throw new DatasetError("CSV needs a header and at least one row");
  }
  const names = lines[0].split(",");
  const values = lines.slice(1).map((line, i) => {
    const cells = line.split(",").map(Number);
    if (cells.length !== names.length || cells.some((v) => !Number.isFinite(v))) {
      throw new DatasetError(`bad CSV row ${i}`);
    }
    return cells;
  });
  return { names, values };
}
