/** Process plumbing: every binding call shells out to the graphdiv CLI. */
import { spawnSync } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve, dirname } from "node:path";
import { fileURLToPath } from "node:url";

export class CliError extends Error {
  constructor(message: string, readonly exitCode: number | null) {
    super(message);
  }
}

const HERE = dirname(fileURLToPath(import.meta.url));

/** Python executable and source tree; overridable for non-checkout installs. */
export function cliEnvironment(): { python: string; pythonPath: string } {
  const python = process.env.GRAPHDIV_PY ?? "python3";
  const root = process.env.GRAPHDIV_ROOT ?? resolve(HERE, "..", "..");
  return { python, pythonPath: join(root, "src") };
}

export function runCli(args: string[]): { stdout: string; stderr: string } {
  const { python, pythonPath } = cliEnvironment();
  const proc = spawnSync(python, ["-m", "graphdiv", ...args], {
    encoding: "utf8",
    env: {
      ...process.env,
      PYTHONPATH: pythonPath + (process.env.PYTHONPATH ? `:${process.env.PYTHONPATH}` : ""),
    },
    maxBuffer: 1 << 28,
  });
  if (proc.error) {
    throw new CliError(`failed to launch ${python}: ${proc.error.message}`, null);
  }
  if (proc.status !== 0) {
    throw new CliError(
      `graphdiv exited with ${proc.status}: ${proc.stderr.trim()}`,
      proc.status,
    );
  }
  return { stdout: proc.stdout, stderr: proc.stderr };
}

export interface ValueLine {
  value: number;
  k: number;
  n: number;
  extra: Record<string, string>;
}

/** Parse the CLI's single tab-separated result line. */
export function parseValueLine(stdout: string): ValueLine {
  const line = stdout.trim().split("\n").pop() ?? "";
  const fields = new Map<string, string>();
  for (const part of line.split("\t")) {
    const eq = part.indexOf("=");
    if (eq > 0) fields.set(part.slice(0, eq), part.slice(eq + 1));
  }
  const raw = fields.get("value_nats");
  if (raw === undefined) {
    throw new CliError(`unexpected CLI output: ${line}`, 0);
  }
  const extra: Record<string, string> = {};
  for (const [key, val] of fields) {
    if (key !== "value_nats" && key !== "k" && key !== "n") extra[key] = val;
  }
  return {
    value: Number(raw),
    k: Number(fields.get("k") ?? "0"),
    n: Number(fields.get("n") ?? "0"),
    extra,
  };
}

/** Run `body` with a scratch directory that is always cleaned up. */
export function withScratchDir<T>(body: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "graphdiv-"));
  try {
    return body(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

export function writeText(dir: string, name: string, text: string): string {
  const path = join(dir, name);
  writeFileSync(path, text);
  return path;
}

export function readText(path: string): string {
  return readFileSync(path, "utf8");
}
