// Vocabulary TSV loader.  The file format is the pipeline's public contract:
// one piece per line, `surface<TAB>log_prob<TAB>kind`, ids by line order,
// with the five specials [PAD] [UNK] [CLS] [SEP] [MASK] on lines 1-5.

import { readFileSync } from "node:fs";

export const PAD_ID = 0;
export const UNK_ID = 1;
export const CLS_ID = 2;
export const SEP_ID = 3;
export const MASK_ID = 4;

export const SPECIAL_SURFACES = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"] as const;

export type PieceKind = "SPECIAL" | "CHAR" | "WORD";

export interface Piece {
  surface: string;
  logProb: number;
  kind: PieceKind;
}

export class VocabFormatError extends Error {
  constructor(message: string, readonly line?: number) {
    super(line === undefined ? message : `line ${line}: ${message}`);
    this.name = "VocabFormatError";
  }
}

/** Count of Unicode scalar values, matching the pipeline's notion of length. */
export function scalarLength(text: string): number {
  let n = 0;
  for (const _ of text) n++;
  return n;
}

export class Vocabulary {
  readonly pieces: Piece[];
  readonly idOf: Map<string, number>;
  /** CHAR/WORD surfaces only, so raw text can never match a special token. */
  readonly matchTable: Map<string, { id: number; logProb: number }>;

  constructor(pieces: Piece[]) {
    if (pieces.length < 5) {
      throw new VocabFormatError("vocabulary needs at least the 5 special tokens");
    }
    this.pieces = pieces;
    this.idOf = new Map();
    this.matchTable = new Map();
    pieces.forEach((piece, id) => {
      if (this.idOf.has(piece.surface)) {
        throw new VocabFormatError(`duplicate surface ${JSON.stringify(piece.surface)}`);
      }
      this.idOf.set(piece.surface, id);
      if (piece.kind !== "SPECIAL") {
        this.matchTable.set(piece.surface, { id, logProb: piece.logProb });
      }
    });
  }

  get size(): number {
    return this.pieces.length;
  }

  charId(char: string): number | undefined {
    const hit = this.matchTable.get(char);
    return hit !== undefined && scalarLength(char) === 1 ? hit.id : undefined;
  }
}

// Python's repr/%.17g spellings, which Number() does not all accept.
function parseLogProb(text: string, lineno: number): number {
  const t = text.trim();
  if (t === "inf" || t === "+inf") return Infinity;
  if (t === "-inf") return -Infinity;
  if (t === "") {
    throw new VocabFormatError("empty log_prob field", lineno);
  }
  const value = Number(t);
  if (Number.isNaN(value)) {
    throw new VocabFormatError(`bad log_prob ${JSON.stringify(text)}`, lineno);
  }
  return value;
}

export function loadVocabulary(path: string): Vocabulary {
  const raw = readFileSync(path, "utf-8");
  const lines = raw.split("\n");
  if (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }
  const pieces: Piece[] = [];
  lines.forEach((line, index) => {
    const lineno = index + 1;
    if (line === "") {
      throw new VocabFormatError("empty line", lineno);
    }
    const fields = line.split("\t");
    if (fields.length !== 3) {
      throw new VocabFormatError(`expected 3 tab-separated fields, got ${fields.length}`, lineno);
    }
    const [surface, logProbText, kindText] = fields;
    if (kindText !== "SPECIAL" && kindText !== "CHAR" && kindText !== "WORD") {
      throw new VocabFormatError(`unknown kind ${JSON.stringify(kindText)}`, lineno);
    }
    const logProb = parseLogProb(logProbText, lineno);
    const ordinal = lineno - 1;
    if (ordinal < 5) {
      if (surface !== SPECIAL_SURFACES[ordinal] || kindText !== "SPECIAL") {
        throw new VocabFormatError(`line must be the special ${SPECIAL_SURFACES[ordinal]}`, lineno);
      }
      if (logProb !== 0) {
        throw new VocabFormatError("special tokens must carry log_prob 0", lineno);
      }
    } else if (kindText === "SPECIAL") {
      throw new VocabFormatError("SPECIAL kind outside the first five lines", lineno);
    }
    const arity = scalarLength(surface);
    if (kindText === "CHAR" && arity !== 1) {
      throw new VocabFormatError("CHAR piece must be a single scalar", lineno);
    }
    if (kindText === "WORD" && arity < 2) {
      throw new VocabFormatError("WORD piece must have >= 2 scalars", lineno);
    }
    pieces.push({ surface, logProb, kind: kindText });
  });
  return new Vocabulary(pieces);
}
