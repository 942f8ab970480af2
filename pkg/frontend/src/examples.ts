// Training-example generation.  The per-example rng stream is internal to the
// pipeline, so this goes through the CLI (`build-dataset`) rather than
// reimplementing it: the example for ordinal k is produced by building a
// dataset whose k-th line is the requested text.

import { spawnSync } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { ExampleRecord, datasetShardPaths, iterShards } from "./shards.js";

export interface MaskingOptions {
  maskRate?: number;
  actionProbs?: [number, number, number];
  cmlmRate?: number;
  ngramProbs?: [number, number, number, number];
  maxLen?: number;
  seed?: number;
  task?: "mlm" | "mmlm";
  maxPieceLen?: number;
}

/** Command used to reach the pipeline CLI; override via MIXTOK_CLI. */
export function cliCommand(): string[] {
  const override = process.env.MIXTOK_CLI;
  if (override !== undefined && override.trim() !== "") {
    return override.trim().split(/\s+/);
  }
  return ["mixtok"];
}

export function runCli(args: string[], stdin?: string): string {
  const [command, ...prefix] = cliCommand();
  const result = spawnSync(command, [...prefix, ...args], {
    input: stdin,
    encoding: "utf-8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (result.error) {
    throw result.error;
  }
  if (result.status !== 0) {
    throw new Error(`mixtok ${args[0]} failed (exit ${result.status}): ${result.stderr}`);
  }
  return result.stdout;
}

// Ordinals are line indices; earlier lines only pad the ordinal space and any
// non-empty text works because rng streams are independent per ordinal.
const FILLER_LINE = "一";

export function makeExample(
  text: string,
  vocabPath: string,
  options: MaskingOptions,
  ordinal: number,
): ExampleRecord {
  if (!Number.isInteger(ordinal) || ordinal < 0) {
    throw new Error(`ordinal must be a nonnegative integer, got ${ordinal}`);
  }
  if (text.trim() === "") {
    throw new Error("text must be non-empty after normalization");
  }
  const workDir = mkdtempSync(join(tmpdir(), "mixtok-example-"));
  try {
    const inputPath = join(workDir, "input.txt");
    const lines = new Array<string>(ordinal).fill(FILLER_LINE);
    lines.push(text);
    writeFileSync(inputPath, lines.join("\n") + "\n", "utf-8");
    const outDir = join(workDir, "data");
    const args = [
      "build-dataset",
      "--vocab", vocabPath,
      "--input", inputPath,
      "--out", outDir,
      "--shard-size", String(ordinal + 1),
    ];
    if (options.maskRate !== undefined) args.push("--mask-rate", String(options.maskRate));
    if (options.cmlmRate !== undefined) args.push("--cmlm-rate", String(options.cmlmRate));
    if (options.actionProbs !== undefined) args.push("--action-probs", options.actionProbs.join(","));
    if (options.ngramProbs !== undefined) args.push("--ngram-probs", options.ngramProbs.join(","));
    if (options.maxLen !== undefined) args.push("--max-len", String(options.maxLen));
    if (options.seed !== undefined) args.push("--seed", String(options.seed));
    if (options.task !== undefined) args.push("--task", options.task);
    if (options.maxPieceLen !== undefined) args.push("--max-piece-len", String(options.maxPieceLen));
    runCli(args);
    let index = 0;
    for (const record of iterShards(datasetShardPaths(outDir))) {
      if (index === ordinal) {
        return record;
      }
      index++;
    }
    throw new Error(`dataset produced ${index} examples; ordinal ${ordinal} missing`);
  } finally {
    rmSync(workDir, { recursive: true, force: true });
  }
}
