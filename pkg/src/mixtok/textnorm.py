"""Corpus ingestion and text normalization.

Every downstream stage (vocabulary training, tokenization, masking) operates
on the normalized form produced here: NFKC, no control characters, whitespace
runs collapsed to single spaces, leading/trailing whitespace trimmed.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Iterator

from .errors import InvalidEncodingError

# Unicode category Cc is exactly U+0000..U+001F and U+007F..U+009F.
_CC_DELETE = {cp: None for cp in range(0x20)}
_CC_DELETE.update({cp: None for cp in range(0x7F, 0xA0)})

_MAX_PASSES = 8


@dataclass(frozen=True)
class NormalizedText:
    """A normalized corpus line plus its 1-based line number of origin."""

    text: str
    source_line: int = 0


def _normalize_once(text: str) -> str:
    text = unicodedata.normalize("NFKC", text)
    text = text.translate(_CC_DELETE)
    return " ".join(text.split())


def normalize(raw: str) -> str:
    """Normalize a string: NFKC, strip control chars, collapse whitespace, trim.

    The single pass is iterated to a fixed point because deleting characters
    can re-enable NFKC compositions (e.g. a control char between a base char
    and a combining mark), and some compatibility decompositions introduce
    spaces next to existing ones.  This guarantees
    ``normalize(normalize(x)) == normalize(x)``.
    """
    out = raw
    for _ in range(_MAX_PASSES):
        nxt = _normalize_once(out)
        if nxt == out:
            return out
        out = nxt
    raise RuntimeError(f"normalization did not converge after {_MAX_PASSES} passes")


def read_corpus(path) -> Iterator[NormalizedText]:
    """Yield one :class:`NormalizedText` per non-empty line of a UTF-8 file.

    Lines that normalize to the empty string are skipped.  Invalid UTF-8 is a
    hard error carrying the offending line number, never a silent replacement.
    """
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, start=1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise InvalidEncodingError(
                    f"{path}: invalid UTF-8 on line {lineno}: {exc}", line=lineno
                ) from exc
            text = normalize(line)
            if text:
                yield NormalizedText(text, lineno)
