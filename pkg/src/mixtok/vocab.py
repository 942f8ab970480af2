"""Mixed-granularity vocabulary: special tokens, characters, and word pieces.

A vocabulary is an ordered list of pieces with dense integer ids.  Ids 0-4 are
always the five special tokens; the remainder are single characters (CHAR) and
multi-character words (WORD) carrying natural-log unigram probabilities.

File format: UTF-8 TSV, one piece per line, ``surface<TAB>log_prob<TAB>kind``
with kind in {SPECIAL, CHAR, WORD}.  Line order defines ids; the first five
lines must be ``[PAD] [UNK] [CLS] [SEP] [MASK]`` with log_prob 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import (
    DuplicateSurfaceError,
    MissingRequiredCharError,
    NonContiguousSpecialsError,
    TargetTooSmallError,
    VocabFormatError,
)

PAD_ID, UNK_ID, CLS_ID, SEP_ID, MASK_ID = range(5)
SPECIAL_SURFACES = ("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]")
SPECIAL_IDS = frozenset(range(5))


class PieceKind(Enum):
    SPECIAL = "SPECIAL"
    CHAR = "CHAR"
    WORD = "WORD"


@dataclass(frozen=True)
class Piece:
    surface: str
    log_prob: float
    kind: PieceKind

    def __post_init__(self):
        if not self.surface:
            raise ValueError("piece surface must be non-empty")
        if self.kind is PieceKind.CHAR and len(self.surface) != 1:
            raise ValueError(f"CHAR piece must be a single scalar: {self.surface!r}")
        if self.kind is PieceKind.WORD and len(self.surface) < 2:
            raise ValueError(f"WORD piece must have >= 2 scalars: {self.surface!r}")
        if self.kind is not PieceKind.SPECIAL and self.log_prob > 0.0:
            raise ValueError(f"log_prob must be <= 0 for {self.surface!r}")


def special_pieces() -> list[Piece]:
    """The five special pieces in id order, log_prob 0 by convention."""
    return [Piece(s, 0.0, PieceKind.SPECIAL) for s in SPECIAL_SURFACES]


class Vocabulary:
    """Immutable ordered piece table with dense ids and fixed special slots."""

    def __init__(self, pieces: Sequence[Piece]):
        pieces = tuple(pieces)
        if len(pieces) < 5 or tuple(p.surface for p in pieces[:5]) != SPECIAL_SURFACES:
            raise NonContiguousSpecialsError(
                "ids 0-4 must be [PAD] [UNK] [CLS] [SEP] [MASK] in order"
            )
        id_of: dict[str, int] = {}
        for i, p in enumerate(pieces):
            if (p.kind is PieceKind.SPECIAL) != (i < 5):
                raise NonContiguousSpecialsError(
                    f"piece {p.surface!r} at id {i} has kind {p.kind.value}"
                )
            if p.surface in id_of:
                raise DuplicateSurfaceError(f"duplicate surface {p.surface!r}")
            id_of[p.surface] = i
        self._pieces = pieces
        self._id_of = id_of
        # Lookup table for lattice building: CHAR/WORD surfaces only, so text
        # can never match a special token.
        self.match_table: dict[str, tuple[int, float]] = {
            p.surface: (i, p.log_prob) for i, p in enumerate(pieces) if i >= 5
        }

    def __len__(self) -> int:
        return len(self._pieces)

    def __contains__(self, surface: str) -> bool:
        return surface in self._id_of

    @property
    def pieces(self) -> tuple[Piece, ...]:
        return self._pieces

    def id_of(self, surface: str) -> int | None:
        return self._id_of.get(surface)

    def piece(self, piece_id: int) -> Piece:
        return self._pieces[piece_id]

    def char_id(self, char: str) -> int | None:
        """Id of the CHAR piece for ``char``, or None if uncovered."""
        hit = self.match_table.get(char)
        return hit[0] if hit is not None and len(char) == 1 else None

    def has_words(self) -> bool:
        return any(p.kind is PieceKind.WORD for p in self._pieces)


def _log_norm(log_values: Iterable[float]) -> float:
    vals = list(log_values)
    m = max(vals)
    if m == float("-inf"):
        return m
    return m + math.log(math.fsum(math.exp(v - m) for v in vals))


def _final_order(p: Piece):
    return (-p.log_prob, len(p.surface), p.surface)


def build_final(
    candidates: Sequence[Piece], target_size: int, required_chars: Iterable[str]
) -> Vocabulary:
    """Assemble the final vocabulary from trained candidates.

    Keeps the 5 specials, every required character, and the highest-log_prob
    remaining candidates up to exactly ``target_size`` pieces.  Ties break by
    shorter surface first, then lexicographically by code points.  Retained
    CHAR/WORD log_probs are renormalized to sum to 1 in probability space.
    """
    required = set(required_chars)
    by_surface: dict[str, Piece] = {}
    for p in candidates:
        if p.kind is PieceKind.SPECIAL:
            raise ValueError("special pieces are implicit; do not pass them as candidates")
        if p.surface in by_surface:
            raise DuplicateSurfaceError(f"duplicate candidate surface {p.surface!r}")
        by_surface[p.surface] = p
    for ch in sorted(required):
        got = by_surface.get(ch)
        if got is None or got.kind is not PieceKind.CHAR:
            raise MissingRequiredCharError(ch)
    if target_size < 5 + len(required):
        raise TargetTooSmallError(
            f"target_size {target_size} cannot fit 5 specials plus "
            f"{len(required)} required characters"
        )
    forced = [by_surface[ch] for ch in sorted(required)]
    pool = [p for p in by_surface.values() if p.surface not in required]
    pool.sort(key=_final_order)
    room = target_size - 5 - len(forced)
    if len(pool) < room:
        raise TargetTooSmallError(
            f"only {5 + len(forced) + len(pool)} pieces available for "
            f"target_size {target_size}"
        )
    chosen = forced + pool[:room]
    if chosen:
        norm = _log_norm(p.log_prob for p in chosen)
        chosen = [Piece(p.surface, p.log_prob - norm, p.kind) for p in chosen]
        chosen.sort(key=_final_order)
    return Vocabulary(special_pieces() + chosen)


def save(vocab: Vocabulary, path) -> None:
    """Write the vocabulary TSV.  ``%.17g`` keeps 64-bit floats bit-exact."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in vocab.pieces:
            fh.write(f"{p.surface}\t{p.log_prob:.17g}\t{p.kind.value}\n")


def load(path) -> Vocabulary:
    """Read a vocabulary TSV written by :func:`save` (or by hand)."""
    pieces: list[Piece] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                raise VocabFormatError("empty line", line=lineno)
            fields = line.split("\t")
            if len(fields) != 3:
                raise VocabFormatError(f"expected 3 tab-separated fields, got {len(fields)}", line=lineno)
            surface, log_prob_text, kind_text = fields
            try:
                kind = PieceKind(kind_text)
            except ValueError:
                raise VocabFormatError(f"unknown kind {kind_text!r}", line=lineno) from None
            try:
                log_prob = float(log_prob_text)
            except ValueError:
                raise VocabFormatError(f"bad log_prob {log_prob_text!r}", line=lineno) from None
            if surface in seen:
                raise DuplicateSurfaceError(
                    f"surface {surface!r} already defined on line {seen[surface]}", line=lineno
                )
            seen[surface] = lineno
            ordinal = lineno - 1
            if ordinal < 5:
                if surface != SPECIAL_SURFACES[ordinal] or kind is not PieceKind.SPECIAL:
                    raise NonContiguousSpecialsError(
                        f"line {lineno} must be the special {SPECIAL_SURFACES[ordinal]}",
                        line=lineno,
                    )
                if log_prob != 0.0:
                    raise VocabFormatError("special tokens must carry log_prob 0", line=lineno)
            elif kind is PieceKind.SPECIAL:
                raise NonContiguousSpecialsError(
                    "SPECIAL kind outside the first five lines", line=lineno
                )
            try:
                pieces.append(Piece(surface, log_prob, kind))
            except ValueError as exc:
                raise VocabFormatError(str(exc), line=lineno) from None
    if len(pieces) < 5:
        raise VocabFormatError(f"file has {len(pieces)} lines; needs the 5 specials")
    return Vocabulary(pieces)
