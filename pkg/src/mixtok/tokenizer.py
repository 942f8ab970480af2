"""Encode normalized text into token sequences and decode back.

Two modes: ``mixed`` runs the Viterbi segmentation over the full vocabulary;
``char`` emits one CHAR piece per character (UNK for uncovered characters)
and never produces WORD pieces.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .errors import AlreadyHasSpecialsError, UnknownIdError
from .lattice import DEFAULT_MAX_PIECE_LEN, DEFAULT_UNK_PENALTY
from .vocab import CLS_ID, SEP_ID, SPECIAL_IDS, UNK_ID, Vocabulary

MODE_MIXED = "mixed"
MODE_CHAR = "char"

_NEG_INF = float("-inf")


@dataclass(frozen=True)
class TokenSequence:
    """Piece ids plus the character span each piece covers in the source text.

    Spans partition the text contiguously; specials added later carry
    zero-width sentinel spans.
    """

    piece_ids: tuple[int, ...]
    spans: tuple[tuple[int, int], ...]
    mode: str

    def __len__(self) -> int:
        return len(self.piece_ids)


def _viterbi_spans(
    text: str,
    vocab: Vocabulary,
    max_piece_len: int,
    unk_penalty: float,
) -> list[tuple[int, int, int]]:
    """Best segmentation as (begin, end, piece_id) triples.

    Inline DP over arrays: identical scores and tie-breaking to
    ``lattice.viterbi`` (edges relaxed in (begin, end) order, UNK last per
    begin) but without building edge objects, which keeps bulk encoding fast.
    """
    length = len(text)
    if length == 0:
        return []
    get = vocab.match_table.get
    best_score = [_NEG_INF] * (length + 1)
    best_score[0] = 0.0
    best_npieces = [1 << 62] * (length + 1)
    best_npieces[0] = 0
    back_begin = [-1] * (length + 1)
    back_id = [0] * (length + 1)
    for begin in range(length):
        s0 = best_score[begin]
        if s0 == _NEG_INF:
            continue
        n1 = best_npieces[begin] + 1
        limit = min(begin + max_piece_len, length)
        has_single = False
        for end in range(begin + 1, limit + 1):
            hit = get(text[begin:end])
            if hit is None:
                continue
            if end == begin + 1:
                has_single = True
            s = s0 + hit[1]
            if s > best_score[end] or (
                s == best_score[end]
                and (
                    n1 < best_npieces[end]
                    or (n1 == best_npieces[end] and begin < back_begin[end])
                )
            ):
                best_score[end] = s
                best_npieces[end] = n1
                back_begin[end] = begin
                back_id[end] = hit[0]
        if not has_single:
            end = begin + 1
            s = s0 + unk_penalty
            if s > best_score[end] or (
                s == best_score[end]
                and (
                    n1 < best_npieces[end]
                    or (n1 == best_npieces[end] and begin < back_begin[end])
                )
            ):
                best_score[end] = s
                best_npieces[end] = n1
                back_begin[end] = begin
                back_id[end] = UNK_ID
    triples: list[tuple[int, int, int]] = []
    pos = length
    while pos > 0:
        begin = back_begin[pos]
        triples.append((begin, pos, back_id[pos]))
        pos = begin
    triples.reverse()
    return triples


def encode(
    text: str,
    vocab: Vocabulary,
    mode: str = MODE_MIXED,
    max_piece_len: int = DEFAULT_MAX_PIECE_LEN,
    unk_penalty: float = DEFAULT_UNK_PENALTY,
) -> TokenSequence:
    """Tokenize a normalized line.  Never fails: uncovered characters fall
    back to UNK."""
    if mode == MODE_CHAR:
        ids = []
        spans = []
        for i, ch in enumerate(text):
            cid = vocab.char_id(ch)
            ids.append(UNK_ID if cid is None else cid)
            spans.append((i, i + 1))
        return TokenSequence(tuple(ids), tuple(spans), MODE_CHAR)
    if mode != MODE_MIXED:
        raise ValueError(f"unknown mode {mode!r}")
    triples = _viterbi_spans(text, vocab, max_piece_len, unk_penalty)
    return TokenSequence(
        tuple(t[2] for t in triples),
        tuple((t[0], t[1]) for t in triples),
        MODE_MIXED,
    )


def decode(seq: TokenSequence | Iterable[int], vocab: Vocabulary) -> str:
    """Concatenate the surfaces of non-special pieces."""
    ids: Sequence[int] = seq.piece_ids if isinstance(seq, TokenSequence) else tuple(seq)
    parts = []
    n = len(vocab)
    for pid in ids:
        if not isinstance(pid, int) or pid < 0 or pid >= n:
            raise UnknownIdError(f"id {pid!r} out of range for vocabulary of size {n}")
        if pid in SPECIAL_IDS:
            continue
        parts.append(vocab.piece(pid).surface)
    return "".join(parts)


def add_specials(seq: TokenSequence) -> TokenSequence:
    """Prepend [CLS] and append [SEP] with zero-width sentinel spans."""
    if any(pid in SPECIAL_IDS for pid in seq.piece_ids):
        raise AlreadyHasSpecialsError("sequence already contains special ids")
    end = seq.spans[-1][1] if seq.spans else 0
    return replace(
        seq,
        piece_ids=(CLS_ID,) + seq.piece_ids + (SEP_ID,),
        spans=((0, 0),) + seq.spans + ((end, end),),
    )
