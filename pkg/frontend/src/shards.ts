// Shard readers for the pipeline's JSONL dataset format: a single-line JSON
// header (format version, fingerprint, max_len, example count) followed by
// one example per line.

import { readFileSync } from "node:fs";
import { join } from "node:path";

export interface ExampleRecord {
  input_ids: number[];
  labels: number[];
  attention: number[];
}

export class ShardFormatError extends Error {
  constructor(message: string, readonly path?: string, readonly line?: number) {
    super(path === undefined ? message : `${path}:${line ?? "?"}: ${message}`);
    this.name = "ShardFormatError";
  }
}

export class FingerprintMismatchError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "FingerprintMismatchError";
  }
}

function parseRecord(obj: unknown, path: string, line: number): ExampleRecord {
  if (typeof obj !== "object" || obj === null) {
    throw new ShardFormatError("example is not an object", path, line);
  }
  const record = obj as Record<string, unknown>;
  const keys = Object.keys(record).sort();
  if (keys.join(",") !== "attention,input_ids,labels") {
    throw new ShardFormatError("example must have input_ids/labels/attention", path, line);
  }
  for (const key of ["input_ids", "labels", "attention"]) {
    const value = record[key];
    if (!Array.isArray(value) || !value.every((x) => Number.isInteger(x))) {
      throw new ShardFormatError(`${key} must be an integer array`, path, line);
    }
  }
  const out = record as unknown as ExampleRecord;
  if (out.input_ids.length !== out.labels.length || out.labels.length !== out.attention.length) {
    throw new ShardFormatError("parallel arrays differ in length", path, line);
  }
  return out;
}

/** Yield examples from shard files in order, verifying headers. */
export function* iterShards(paths: Iterable<string>): Generator<ExampleRecord> {
  let expectedFingerprint: string | undefined;
  for (const path of paths) {
    const lines = readFileSync(path, "utf-8").split("\n");
    if (lines.length > 0 && lines[lines.length - 1] === "") {
      lines.pop();
    }
    if (lines.length === 0) {
      throw new ShardFormatError("empty shard", path, 1);
    }
    let header: Record<string, unknown>;
    try {
      header = JSON.parse(lines[0]);
    } catch (exc) {
      throw new ShardFormatError(`bad header: ${exc}`, path, 1);
    }
    if (header.format_version !== 1) {
      throw new ShardFormatError(`unsupported format_version ${header.format_version}`, path, 1);
    }
    const fingerprint = header.config_fingerprint as string | undefined;
    if (expectedFingerprint === undefined) {
      expectedFingerprint = fingerprint;
    } else if (fingerprint !== expectedFingerprint) {
      throw new FingerprintMismatchError(
        `${path}: fingerprint ${fingerprint} != ${expectedFingerprint}`,
      );
    }
    let count = 0;
    for (let i = 1; i < lines.length; i++) {
      let obj: unknown;
      try {
        obj = JSON.parse(lines[i]);
      } catch (exc) {
        throw new ShardFormatError(`bad example: ${exc}`, path, i + 1);
      }
      yield parseRecord(obj, path, i + 1);
      count++;
    }
    if (count !== header.example_count) {
      throw new ShardFormatError(
        `header promises ${header.example_count} examples, found ${count}`,
        path,
      );
    }
  }
}

/** Shard paths listed by a dataset directory's manifest. */
export function datasetShardPaths(datasetDir: string): string[] {
  const manifest = JSON.parse(readFileSync(join(datasetDir, "manifest.json"), "utf-8"));
  const shards = (manifest.shards ?? []) as Array<{ path: string }>;
  return shards.map((entry) => join(datasetDir, entry.path));
}
