import { spawnSync } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export type TaskKind = "classification" | "regression";
export type SelectionMode = "automatic" | "fixed" | "convergence";
export type LearnerKind = "gbt" | "linear";

export interface SelectorOptions {
  task: TaskKind;
  mode?: SelectionMode;
  alpha?: number;
  requiredPower?: number;
  /** iteration count for fixed mode */
  iterations?: number;
  initialIterations?: number;
  maxIterations?: number;
  valFraction?: number;
  seed?: number;
  learner?: LearnerKind;
  nEstimators?: number;
  maxDepth?: number;
  learningRate?: number;
  minSamplesLeaf?: number;
  leafL2?: number;
  splitNoise?: number;
  /** command used to reach the selection engine */
  command?: string[];
}

export interface FeatureStats {
  name: string;
  p_value: number | null;
  effect_size: number | null;
  required_iterations: number | null;
  mean_impact: number | null;
}

export interface RoundReport {
  round: number;
  selected: string[];
  iterations: number;
  truncated: boolean;
  features: FeatureStats[];
}

export interface RunReport {
  schema_version: number;
  task: TaskKind;
  seed: number;
  config: Record<string, unknown>;
  selected: string[];
  iterations_performed: number;
  truncated: boolean;
  features: FeatureStats[];
  rounds: RoundReport[];
  wall_time_s: number;
}

const TARGET_COLUMN = "__target__";

function featureName(index: number): string {
  return `f${String(index).padStart(5, "0")}`;
}

function checkMatrix(X: number[][], y?: number[]): number {
  if (X.length === 0 || X[0].length === 0) {
    throw new Error("X must be a non-empty 2-D array");
  }
  const width = X[0].length;
  for (const row of X) {
    if (row.length !== width) {
      throw new Error("X rows must all have the same length");
    }
    for (const v of row) {
      if (!Number.isFinite(v)) {
        throw new Error("X must contain only finite numbers");
      }
    }
  }
  if (y !== undefined) {
    if (y.length !== X.length) {
      throw new Error(`y length ${y.length} does not match X rows ${X.length}`);
    }
    for (const v of y) {
      if (!Number.isFinite(v)) {
        throw new Error("y must contain only finite numbers");
      }
    }
  }
  return width;
}

/**
 * Feature selector in the fit/transform idiom.
 *
 * All computation happens in the selection engine, reached once per fit
 * through its command-line interface: the arrays are serialized to a
 * temporary CSV, the engine writes a JSON report, and the temporary files
 * are removed before fit returns. The wrapper holds no algorithm logic of
 * its own, so reported numbers are bit-identical to a direct engine run
 * on the same data and seed.
 */
export class PowershapSelector {
  private readonly options: SelectorOptions;
  private report: RunReport | null = null;
  private indices: number[] | null = null;
  private fittedWidth = 0;

  constructor(options: SelectorOptions) {
    if (options.task !== "classification" && options.task !== "regression") {
      throw new Error(`unknown task: ${String(options.task)}`);
    }
    this.options = { ...options };
  }

  private cliArgs(csvPath: string): string[] {
    const o = this.options;
    const args = [
      "select",
      "--csv", csvPath,
      "--target", TARGET_COLUMN,
      "--task", o.task,
      "--mode", o.mode ?? "automatic",
    ];
    const flag = (name: string, value: number | string | undefined) => {
      if (value !== undefined) {
        args.push(name, String(value));
      }
    };
    flag("--alpha", o.alpha);
    flag("--power", o.requiredPower);
    flag("--iterations", o.iterations);
    flag("--initial-iterations", o.initialIterations);
    flag("--max-iterations", o.maxIterations);
    flag("--val-fraction", o.valFraction);
    flag("--seed", o.seed);
    flag("--learner", o.learner);
    flag("--n-estimators", o.nEstimators);
    flag("--max-depth", o.maxDepth);
    flag("--learning-rate", o.learningRate);
    flag("--min-samples-leaf", o.minSamplesLeaf);
    flag("--leaf-l2", o.leafL2);
    flag("--split-noise", o.splitNoise);
    return args;
  }

  fit(X: number[][], y: number[]): this {
    const width = checkMatrix(X, y);
    const header = [...Array(width).keys()].map(featureName);
    const lines = [header.concat(TARGET_COLUMN).join(",")];
    for (let r = 0; r < X.length; r++) {
      // Number -> string is the shortest round-trip decimal, so the engine
      // parses back the exact same doubles.
      lines.push(X[r].map(String).concat(String(y[r])).join(","));
    }

    const dir = mkdtempSync(join(tmpdir(), "powershap-"));
    try {
      const csvPath = join(dir, "data.csv");
      writeFileSync(csvPath, lines.join("\n") + "\n");
      const command = this.options.command ?? ["python3", "-m", "powershap.cli"];
      const proc = spawnSync(command[0], command.slice(1).concat(this.cliArgs(csvPath)), {
        encoding: "utf8",
        maxBuffer: 64 * 1024 * 1024,
      });
      if (proc.error) {
        throw proc.error;
      }
      if (proc.status !== 0) {
        throw new Error(
          `selection engine exited with ${proc.status}: ${proc.stderr.trim()}`
        );
      }
      const report = JSON.parse(proc.stdout) as RunReport;
      const nameToIndex = new Map(header.map((name, i) => [name, i]));
      this.indices = report.selected.map((name) => {
        const idx = nameToIndex.get(name);
        if (idx === undefined) {
          throw new Error(`engine reported unknown feature ${name}`);
        }
        return idx;
      });
      this.report = report;
      this.fittedWidth = width;
      return this;
    } finally {
      rmSync(dir, { recursive: true, force: true });
    }
  }

  /** Indices of the selected columns, in input order. */
  selectedIndices(): number[] {
    if (this.indices === null) {
      throw new Error("selector is not fitted; call fit(X, y) first");
    }
    return [...this.indices];
  }

  /** Keep exactly the selected columns of X, preserving values and order. */
  transform(X: number[][]): number[][] {
    const indices = this.selectedIndices();
    const width = checkMatrix(X);
    if (width !== this.fittedWidth) {
      throw new Error(
        `X has ${width} columns but the selector was fitted on ${this.fittedWidth}`
      );
    }
    return X.map((row) => indices.map((j) => row[j]));
  }

  fitTransform(X: number[][], y: number[]): number[][] {
    return this.fit(X, y).transform(X);
  }

  /** The engine's full JSON report for the last fit. */
  getReport(): RunReport {
    if (this.report === null) {
      throw new Error("selector is not fitted; call fit(X, y) first");
    }
    return JSON.parse(JSON.stringify(this.report)) as RunReport;
  }
}
