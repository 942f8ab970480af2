// Public surface: vocabulary loading, encode/decode, example generation, and
// shard iteration, for use from Node training loops.

import { BoundTokenizer } from "./tokenizer.js";
import { loadVocabulary } from "./vocab.js";

export { BoundTokenizer } from "./tokenizer.js";
export type { EncodeOptions, Mode } from "./tokenizer.js";
export { normalize } from "./normalize.js";
export {
  CLS_ID,
  MASK_ID,
  PAD_ID,
  SEP_ID,
  SPECIAL_SURFACES,
  UNK_ID,
  VocabFormatError,
  Vocabulary,
  loadVocabulary,
} from "./vocab.js";
export type { Piece, PieceKind } from "./vocab.js";
export {
  FingerprintMismatchError,
  ShardFormatError,
  datasetShardPaths,
  iterShards,
} from "./shards.js";
export type { ExampleRecord } from "./shards.js";
export { cliCommand, makeExample, runCli } from "./examples.js";
export type { MaskingOptions } from "./examples.js";

export const VERSION = "0.1.0";

/** Load a vocabulary TSV and return a shareable, immutable tokenizer. */
export function load(vocabPath: string): BoundTokenizer {
  return new BoundTokenizer(loadVocabulary(vocabPath), vocabPath);
}
