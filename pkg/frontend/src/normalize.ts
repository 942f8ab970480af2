// Text normalization mirroring the pipeline's canonical form: NFKC, control
// characters removed, whitespace runs collapsed to single spaces, trimmed.
// Iterated to a fixed point because deleting characters can re-enable NFKC
// compositions.

const MAX_PASSES = 8;

function isControl(cp: number): boolean {
  return cp < 0x20 || (cp >= 0x7f && cp < 0xa0);
}

// Whitespace as Python's str.split() sees it (minus control chars, which are
// stripped first).  Deliberately excludes U+FEFF, which JS \s would match.
const WHITESPACE_RUN = /[ \u00a0\u1680\u2000-\u200a\u2028\u2029\u202f\u205f\u3000]+/gu;

function oncePass(text: string): string {
  const out = text.normalize("NFKC");
  let stripped = "";
  for (const ch of out) {
    if (!isControl(ch.codePointAt(0)!)) {
      stripped += ch;
    }
  }
  return stripped
    .split(WHITESPACE_RUN)
    .filter((part) => part.length > 0)
    .join(" ");
}

export function normalize(raw: string): string {
  let out = raw;
  for (let i = 0; i < MAX_PASSES; i++) {
    const next = oncePass(out);
    if (next === out) {
      return out;
    }
    out = next;
  }
  throw new Error(`normalization did not converge after ${MAX_PASSES} passes`);
}
