// Shared fixture: a deterministic corpus, a vocabulary trained through the
// pipeline CLI, and the CLI's own tokenization of the corpus as the parity
// oracle.

import { spawnSync } from "node:child_process";
import { existsSync, mkdirSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const HERE = dirname(fileURLToPath(import.meta.url));

export const FIXTURE_DIR = join(HERE, ".fixtures");
export const CORPUS_PATH = join(FIXTURE_DIR, "corpus.txt");
export const VOCAB_PATH = join(FIXTURE_DIR, "vocab.tsv");
export const DATASET_DIR = join(FIXTURE_DIR, "dataset");
export const CLI_IDS_PATH = join(FIXTURE_DIR, "cli_ids.txt");
export const MAX_PIECE_LEN = 3;

export function cli(args: string[], stdin?: string): string {
  const result = spawnSync("mixtok", args, {
    input: stdin,
    encoding: "utf-8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (result.status !== 0) {
    throw new Error(`mixtok ${args.join(" ")} failed: ${result.stderr}`);
  }
  return result.stdout;
}

// xorshift-based deterministic generator; any corpus works, it just has to be
// identical across runs
function makeRng(seed: number): () => number {
  let state = seed >>> 0 || 1;
  return () => {
    state ^= state << 13;
    state >>>= 0;
    state ^= state >> 17;
    state ^= state << 5;
    state >>>= 0;
    return state / 0xffffffff;
  };
}

export function corpusLines(count: number, seed = 9): string[] {
  const rng = makeRng(seed);
  const chars: string[] = [];
  for (let i = 0; i < 60; i++) {
    chars.push(String.fromCodePoint(0x4e00 + i));
  }
  const words: string[] = [];
  for (let i = 0; i < 120; i++) {
    const k = 2 + Math.floor(rng() * 3);
    let word = "";
    for (let j = 0; j < k; j++) {
      word += chars[Math.floor(rng() * chars.length)];
    }
    words.push(word);
  }
  const inventory = [...words, ...chars];
  const lines: string[] = [];
  for (let i = 0; i < count; i++) {
    const tokens = 10 + Math.floor(rng() * 10);
    let line = "";
    for (let j = 0; j < tokens; j++) {
      const pick = Math.floor(rng() ** 2 * inventory.length);
      line += inventory[pick];
    }
    lines.push(line + "。");
  }
  return lines;
}

export function ensureFixtures(): void {
  if (existsSync(CLI_IDS_PATH)) {
    return;
  }
  mkdirSync(FIXTURE_DIR, { recursive: true });
  const lines = corpusLines(1000);
  writeFileSync(CORPUS_PATH, lines.join("\n") + "\n", "utf-8");
  cli([
    "train-vocab",
    "--input", CORPUS_PATH,
    "--vocab-size", "300",
    "--model-out", VOCAB_PATH,
    "--max-piece-len", String(MAX_PIECE_LEN),
  ]);
  cli([
    "build-dataset",
    "--vocab", VOCAB_PATH,
    "--input", CORPUS_PATH,
    "--out", DATASET_DIR,
    "--max-len", "96",
    "--max-piece-len", String(MAX_PIECE_LEN),
    "--seed", "21",
    "--shard-size", "400",
  ]);
  const ids = cli(
    ["tokenize", "--vocab", VOCAB_PATH, "--ids", "--max-piece-len", String(MAX_PIECE_LEN)],
    lines.join("\n") + "\n",
  );
  writeFileSync(CLI_IDS_PATH, ids, "utf-8");
}
