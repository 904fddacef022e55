/**
 * Bindings for the graph-divergence estimators.
 *
 * Every function marshals its arguments into the CLI's external formats
 * (CSV datasets, JSON graph files, flag grammar), runs the CLI, and parses
 * the printed result back. No numerics are reimplemented here, so binding
 * results are bit-identical to what the CLI prints for the same inputs.
 */
import { BoundDataset, DatasetError, asDataset, parseCsv } from "./dataset.js";
import {
  CliError,
  parseValueLine,
  readText,
  runCli,
  withScratchDir,
  writeText,
} from "./runner.js";

export { BoundDataset, DatasetError, CliError };

export type Matrix = readonly (readonly number[])[];
export type EstimatorId = "gdm" | "ksg" | "bin" | "sigma_h" | "oracle";
export type KChoice = number | "auto";

/** Graph as a mapping: node id -> columns and parent ids (insertion order kept). */
export type GraphSpec = Record<string, { columns: number[]; parents?: string[] }>;

export interface EstimateOptions {
  k?: KChoice;
  /** samples per bin (bin estimator only) */
  m?: number;
  /** jitter seed (sigma_h estimator only) */
  seed?: number;
}

function graphJson(graph: GraphSpec): string {
  const nodes = Object.entries(graph).map(([id, spec]) => ({
    id,
    columns: spec.columns,
    parents: spec.parents ?? [],
  }));
  if (nodes.length === 0) throw new DatasetError("graph has no nodes");
  return JSON.stringify({ nodes });
}

function kFlag(k: KChoice | undefined): string[] {
  if (k === undefined || k === "auto") return [];
  if (!Number.isInteger(k) || k < 1) throw new DatasetError(`bad k: ${k}`);
  return ["--k", String(k)];
}

/** Divergence of `data` from the factorization encoded by `graph`, in nats. */
export function estimate(
  data: BoundDataset | Matrix,
  graph: GraphSpec,
  estimator: EstimatorId = "gdm",
  options: EstimateOptions = {},
): number {
  const ds = asDataset(data);
  return withScratchDir((dir) => {
    const dataPath = writeText(dir, "data.csv", ds.toCsv());
    const graphPath = writeText(dir, "graph.json", graphJson(graph));
    const args = ["estimate", "--data", dataPath, "--graph", graphPath, "--estimator", estimator];
    if (estimator === "gdm" || estimator === "ksg" || estimator === "sigma_h") {
      args.push(...kFlag(options.k));
    } else if (options.k !== undefined && options.k !== "auto") {
      throw new DatasetError(`estimator ${estimator} takes no k`);
    }
    if (options.m !== undefined) {
      if (estimator !== "bin") throw new DatasetError("m applies to the bin estimator only");
      args.push("--m", String(options.m));
    }
    if (options.seed !== undefined) {
      if (estimator !== "sigma_h") throw new DatasetError("seed applies to the sigma_h estimator only");
      args.push("--seed", String(options.seed));
    }
    return parseValueLine(runCli(args).stdout).value;
  });
}

function measure(ds: BoundDataset, sub: string, flags: string[], k?: KChoice) {
  return withScratchDir((dir) => {
    const dataPath = writeText(dir, "data.csv", ds.toCsv());
    const args = ["measure", sub, "--data", dataPath, ...flags, ...kFlag(k)];
    return parseValueLine(runCli(args).stdout);
  });
}

const group = (cols: readonly number[]) => cols.join(",");

export function mi(data: BoundDataset | Matrix, a: number[], b: number[], k?: KChoice): number {
  return measure(asDataset(data), "mi", ["--a", group(a), "--b", group(b)], k).value;
}

export function cmi(
  data: BoundDataset | Matrix,
  a: number[],
  b: number[],
  c: number[],
  k?: KChoice,
): number {
  return measure(asDataset(data), "cmi", ["--a", group(a), "--b", group(b), "--c", group(c)], k).value;
}

export function totalCorrelation(
  data: BoundDataset | Matrix,
  groups: number[][],
  k?: KChoice,
): number {
  return measure(asDataset(data), "tc", ["--groups", ...groups.map(group)], k).value;
}

export interface MmiResult {
  value: number;
  /** restricted growth string of the minimizing partition, e.g. "0,0,1" */
  partition: string;
}

export function mmi(data: BoundDataset | Matrix, groups: number[][], k?: KChoice): MmiResult {
  const line = measure(asDataset(data), "mmi", ["--groups", ...groups.map(group)], k);
  return { value: line.value, partition: line.extra["partition"] ?? "" };
}

export function directedInformation(
  data: BoundDataset | Matrix,
  x: number,
  y: number,
  order = 1,
  k?: KChoice,
): number {
  return measure(
    asDataset(data), "di",
    ["--x", String(x), "--y", String(y), "--order", String(order)], k,
  ).value;
}

export function rdi(
  data: BoundDataset | Matrix,
  source: number,
  target: number,
  cond?: number,
  k?: KChoice,
): number {
  const flags = ["--source", String(source), "--target", String(target)];
  if (cond !== undefined) flags.push("--cond", String(cond));
  return measure(asDataset(data), "rdi", flags, k).value;
}

export type GeneratorName =
  | "markov_clip"
  | "awgn_bsc"
  | "indep_mixture"
  | "zero_inflated"
  | "feature_selection"
  | "dynamics_network";

export interface GeneratedData {
  names: string[];
  values: number[][];
}

/** Sample one of the benchmark generators; bit-identical to the CLI's CSV. */
export function generate(
  name: GeneratorName,
  n: number,
  seed: number,
  params: Record<string, unknown> = {},
): GeneratedData {
  return withScratchDir((dir) => {
    const out = `${dir}/generated.csv`;
    runCli([
      "generate", "--name", name, "--n", String(n), "--seed", String(seed),
      "--out", out, "--params", JSON.stringify(params),
    ]);
    return parseCsv(readText(out));
  });
}
