// Encode/decode over a loaded vocabulary.  The Viterbi DP mirrors the
// pipeline's reference implementation operation for operation (same float64
// additions in the same order, same tie-breaking), so ids are byte-identical
// to the CLI's `tokenize --ids` output.

import { normalize } from "./normalize.js";
import { MASK_ID, SEP_ID, UNK_ID, Vocabulary, scalarLength } from "./vocab.js";

export type Mode = "mixed" | "char";

export interface EncodeOptions {
  maxPieceLen?: number;
  unkPenalty?: number;
}

const DEFAULT_MAX_PIECE_LEN = 8;
const DEFAULT_UNK_PENALTY = -20.0;
const NPIECES_SENTINEL = Number.MAX_SAFE_INTEGER;

function viterbiIds(
  chars: string[],
  vocab: Vocabulary,
  maxPieceLen: number,
  unkPenalty: number,
): number[] {
  const length = chars.length;
  if (length === 0) {
    return [];
  }
  const table = vocab.matchTable;
  const bestScore = new Array<number>(length + 1).fill(-Infinity);
  bestScore[0] = 0.0;
  const bestNPieces = new Array<number>(length + 1).fill(NPIECES_SENTINEL);
  bestNPieces[0] = 0;
  const backBegin = new Array<number>(length + 1).fill(-1);
  const backId = new Array<number>(length + 1).fill(0);
  for (let begin = 0; begin < length; begin++) {
    const s0 = bestScore[begin];
    if (s0 === -Infinity) {
      continue;
    }
    const n1 = bestNPieces[begin] + 1;
    const limit = Math.min(begin + maxPieceLen, length);
    let hasSingle = false;
    let surface = "";
    for (let end = begin + 1; end <= limit; end++) {
      surface += chars[end - 1];
      const hit = table.get(surface);
      if (hit === undefined) {
        continue;
      }
      if (end === begin + 1) {
        hasSingle = true;
      }
      const s = s0 + hit.logProb;
      if (
        s > bestScore[end] ||
        (s === bestScore[end] &&
          (n1 < bestNPieces[end] || (n1 === bestNPieces[end] && begin < backBegin[end])))
      ) {
        bestScore[end] = s;
        bestNPieces[end] = n1;
        backBegin[end] = begin;
        backId[end] = hit.id;
      }
    }
    if (!hasSingle) {
      const end = begin + 1;
      const s = s0 + unkPenalty;
      if (
        s > bestScore[end] ||
        (s === bestScore[end] &&
          (n1 < bestNPieces[end] || (n1 === bestNPieces[end] && begin < backBegin[end])))
      ) {
        bestScore[end] = s;
        bestNPieces[end] = n1;
        backBegin[end] = begin;
        backId[end] = UNK_ID;
      }
    }
  }
  const reversed: number[] = [];
  let pos = length;
  while (pos > 0) {
    reversed.push(backId[pos]);
    pos = backBegin[pos];
  }
  return reversed.reverse();
}

export class BoundTokenizer {
  constructor(readonly vocabulary: Vocabulary, readonly vocabPath: string) {}

  /** Piece ids for a line; input is normalized exactly like the pipeline. */
  encode(text: string, mode: Mode = "mixed", options: EncodeOptions = {}): number[] {
    const maxPieceLen = options.maxPieceLen ?? DEFAULT_MAX_PIECE_LEN;
    const unkPenalty = options.unkPenalty ?? DEFAULT_UNK_PENALTY;
    const chars = Array.from(normalize(text));
    if (mode === "char") {
      return chars.map((ch) => this.vocabulary.charId(ch) ?? UNK_ID);
    }
    if (mode !== "mixed") {
      throw new Error(`unknown mode ${JSON.stringify(mode)}`);
    }
    return viterbiIds(chars, this.vocabulary, maxPieceLen, unkPenalty);
  }

  /** Concatenated surfaces of non-special pieces. */
  decode(ids: Iterable<number>): string {
    const parts: string[] = [];
    for (const id of ids) {
      if (!Number.isInteger(id) || id < 0 || id >= this.vocabulary.size) {
        throw new Error(`id ${id} out of range for vocabulary of size ${this.vocabulary.size}`);
      }
      if (id > MASK_ID) {
        parts.push(this.vocabulary.pieces[id].surface);
      }
    }
    return parts.join("");
  }
}
