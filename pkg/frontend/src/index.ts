/**
 * TypeScript bindings for the sigkit command-line tool.
 *
 * Every call shells out to the CLI and exchanges data through its public
 * formats: CSV path files in, comma-separated shortest round-trip decimals
 * out.  Numbers survive the trip bit for bit, so results here are identical
 * to what the CLI prints.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export type BasisKind = "lyndon" | "hall";
export type LogsigMethod = "x" | "s" | "o";

/** A path as a list of points; every point must have the same dimension. */
export type Path = readonly (readonly number[])[];

const BASIS_KINDS: readonly BasisKind[] = ["lyndon", "hall"];
const LOGSIG_METHODS: readonly LogsigMethod[] = ["x", "s", "o"];

// Mirrors the CLI capacity guard: a signature may hold at most 2^26 floats.
const MAX_SIG_FLOATS = 2 ** 26;

/** Resolve the CLI executable, overridable via the SIGKIT_CLI variable. */
export function cliCommand(): string {
  return process.env.SIGKIT_CLI ?? "sigkit";
}

function runCli(args: readonly string[]): string {
  const cmd = cliCommand();
  const result = spawnSync(cmd, args, {
    encoding: "utf8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (result.error) {
    throw new Error(`failed to run ${cmd}: ${result.error.message}`);
  }
  if (result.status !== 0) {
    const detail = result.stderr.trim() || `exit status ${result.status}`;
    throw new Error(`${cmd} ${args[0]} failed: ${detail}`);
  }
  return result.stdout;
}

function validateLevel(m: number): void {
  if (!Number.isInteger(m) || m < 1) {
    throw new Error(`level must be a positive integer, got ${m}`);
  }
}

function validateDimension(d: number): void {
  if (!Number.isInteger(d) || d < 1) {
    throw new Error(`dimension must be a positive integer, got ${d}`);
  }
}

function validateBasisKind(kind: string): asserts kind is BasisKind {
  if (!BASIS_KINDS.includes(kind as BasisKind)) {
    throw new Error(`unknown basis kind ${JSON.stringify(kind)}`);
  }
}

function validatePath(points: Path): number {
  if (!Array.isArray(points) || points.length === 0) {
    throw new Error("path must contain at least one point");
  }
  const first = points[0];
  if (!Array.isArray(first) || first.length === 0) {
    throw new Error("points must be non-empty arrays of numbers");
  }
  const d = first.length;
  for (const point of points) {
    if (!Array.isArray(point) || point.length !== d) {
      throw new Error(`all points must have dimension ${d}`);
    }
    for (const value of point) {
      if (typeof value !== "number" || !Number.isFinite(value)) {
        throw new Error("path coordinates must be finite numbers");
      }
    }
  }
  return d;
}

function formatCell(value: number): string {
  // String() drops the sign of negative zero; restore it so the CSV round
  // trip preserves every bit of the input.
  return Object.is(value, -0) ? "-0" : String(value);
}

/** Write the path to a temporary CSV file, run fn on it, then clean up. */
function withPathFile<T>(points: Path, fn: (filename: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "sigkit-"));
  const filename = join(dir, "path.csv");
  const body = points.map((p) => p.map(formatCell).join(",")).join("\n");
  writeFileSync(filename, body + "\n", "utf8");
  try {
    return fn(filename);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

function parseRow(line: string): Float64Array {
  const cells = line.trim().split(",");
  const values = new Float64Array(cells.length);
  for (let i = 0; i < cells.length; i++) {
    const cell = cells[i]!.trim();
    const value = Number(cell);
    if (cell === "" || Number.isNaN(value)) {
      throw new Error(`unparseable number ${JSON.stringify(cell)} in CLI output`);
    }
    values[i] = value;
  }
  return values;
}

function sigLengthFor(d: number, m: number): number {
  let total = 0;
  let power = 1;
  for (let k = 1; k <= m; k++) {
    power *= d;
    total += power;
    if (total > MAX_SIG_FLOATS) {
      throw new Error(
        `signature with d=${d}, m=${m} exceeds the capacity limit of ` +
          `${MAX_SIG_FLOATS} floats`,
      );
    }
  }
  return total;
}

/**
 * Signature of a piecewise-linear path truncated at the given level.
 *
 * Returns levels 1..m concatenated, each level ordered lexicographically
 * by word, exactly as the CLI prints it.
 */
export function sig(points: Path, m: number): Float64Array {
  validateLevel(m);
  const d = validatePath(points);
  sigLengthFor(d, m);
  const out = withPathFile(points, (filename) =>
    runCli(["sig", filename, "-m", String(m)]),
  );
  return parseRow(out);
}

/** List the Lie basis elements for (d, m), one bracket string per entry. */
export function basis(d: number, m: number, kind: BasisKind = "lyndon"): string[] {
  validateDimension(d);
  validateLevel(m);
  validateBasisKind(kind);
  const out = runCli([
    "basis",
    "-d",
    String(d),
    "-m",
    String(m),
    "--basis",
    kind,
  ]);
  return out.split("\n").filter((line) => line.length > 0);
}

/**
 * A validated (dimension, level, basis, methods) configuration.
 *
 * Creating a handle runs the CLI once to fetch the basis labels, which both
 * validates the configuration and fixes the coefficient order for every
 * later logsig call.  Handles hold no external resources; release() simply
 * marks the handle unusable so lifecycle bugs surface as errors.
 */
export class PreparedHandle {
  readonly d: number;
  readonly m: number;
  readonly basisKind: BasisKind;
  readonly methods: ReadonlySet<LogsigMethod>;
  readonly labels: readonly string[];
  private released = false;

  /** @internal use prepare() instead */
  constructor(
    d: number,
    m: number,
    basisKind: BasisKind,
    methods: ReadonlySet<LogsigMethod>,
    labels: readonly string[],
  ) {
    this.d = d;
    this.m = m;
    this.basisKind = basisKind;
    this.methods = methods;
    this.labels = labels;
  }

  /** Number of coefficients a logsig call returns (methods s and o). */
  get logsigLength(): number {
    return this.labels.length;
  }

  /** Number of coefficients method x returns: the full signature length. */
  get sigLength(): number {
    return sigLengthFor(this.d, this.m);
  }

  get defaultMethod(): LogsigMethod {
    if (this.methods.has("s")) {
      return "s";
    }
    return [...this.methods][0]!;
  }

  get isReleased(): boolean {
    return this.released;
  }

  /** Mark the handle unusable.  Safe to call more than once. */
  release(): void {
    this.released = true;
  }

  /** @internal */
  assertLive(): void {
    if (this.released) {
      throw new Error("prepared handle has been released");
    }
  }
}

/**
 * Validate a configuration and capture the basis labels for later calls.
 *
 * The methods string lists which logsig methods the handle allows, any
 * combination of the letters x, s and o.
 */
export function prepare(
  d: number,
  m: number,
  kind: BasisKind = "lyndon",
  methods: string = "s",
): PreparedHandle {
  validateDimension(d);
  validateLevel(m);
  validateBasisKind(kind);
  sigLengthFor(d, m);
  const parsed = new Set<LogsigMethod>();
  for (const ch of methods.toLowerCase()) {
    if (!LOGSIG_METHODS.includes(ch as LogsigMethod)) {
      throw new Error(`unknown logsig method ${JSON.stringify(ch)}`);
    }
    parsed.add(ch as LogsigMethod);
  }
  if (parsed.size === 0) {
    throw new Error("at least one logsig method is required");
  }
  const labels = basis(d, m, kind);
  return new PreparedHandle(d, m, kind, parsed, labels);
}

/**
 * Log signature of a path under a prepared configuration.
 *
 * Methods s and o return one coefficient per basis label; method x returns
 * the logarithm in tensor coordinates, the same length as the signature.
 */
export function logsig(
  points: Path,
  handle: PreparedHandle,
  method?: LogsigMethod,
): Float64Array {
  handle.assertLive();
  const chosen = method ?? handle.defaultMethod;
  if (!LOGSIG_METHODS.includes(chosen)) {
    throw new Error(`unknown logsig method ${JSON.stringify(chosen)}`);
  }
  if (!handle.methods.has(chosen)) {
    throw new Error(`method ${chosen} was not requested when preparing`);
  }
  const d = validatePath(points);
  if (d !== handle.d) {
    throw new Error(
      `path dimension ${d} does not match prepared dimension ${handle.d}`,
    );
  }
  const out = withPathFile(points, (filename) =>
    runCli([
      "logsig",
      filename,
      "-m",
      String(handle.m),
      "--basis",
      handle.basisKind,
      "--method",
      chosen,
    ]),
  );
  return parseRow(out);
}
