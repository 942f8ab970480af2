"""Segmentation lattice over a text plus exact dynamic programming.

Edges are in-vocabulary substrings scored by their piece log-probability; a
path from position 0 to L is a segmentation whose score is the sum of its
edge scores.  All arithmetic is in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import TextTooLongError
from .vocab import UNK_ID, Vocabulary

DEFAULT_UNK_PENALTY = -20.0
DEFAULT_MAX_PIECE_LEN = 8
ENUMERATION_GUARD = 16

_NEG_INF = float("-inf")


class LatticeEdge(NamedTuple):
    begin: int
    end: int
    piece_id: int
    score: float


@dataclass(frozen=True)
class Lattice:
    """Edges over ``length`` character positions, listed in (begin, end) order
    with the UNK fallback edge (if any) last within each begin."""

    length: int
    edges: tuple[LatticeEdge, ...]


@dataclass(frozen=True)
class PathResult:
    piece_ids: tuple[int, ...]
    spans: tuple[tuple[int, int], ...]
    score: float


@dataclass(frozen=True)
class ExpectedCounts:
    counts: dict[int, float]
    total_log_likelihood: float


def build_lattice(
    text: str,
    vocab: Vocabulary,
    max_piece_len: int = DEFAULT_MAX_PIECE_LEN,
    unk_penalty: float = DEFAULT_UNK_PENALTY,
) -> Lattice:
    """One edge per in-vocabulary substring of length <= max_piece_len.

    A position whose single character is uncovered gets a span-1 UNK edge so
    the lattice is always connected.
    """
    if max_piece_len < 1:
        raise ValueError("max_piece_len must be >= 1")
    table = vocab.match_table
    get = table.get
    length = len(text)
    edges: list[LatticeEdge] = []
    for begin in range(length):
        has_single = False
        limit = min(begin + max_piece_len, length)
        for end in range(begin + 1, limit + 1):
            hit = get(text[begin:end])
            if hit is None:
                continue
            if end == begin + 1:
                has_single = True
            edges.append(LatticeEdge(begin, end, hit[0], hit[1]))
        if not has_single:
            edges.append(LatticeEdge(begin, begin + 1, UNK_ID, unk_penalty))
    return Lattice(length, tuple(edges))


def _out_edges(lattice: Lattice) -> list[list[LatticeEdge]]:
    out: list[list[LatticeEdge]] = [[] for _ in range(lattice.length)]
    for e in lattice.edges:
        out[e.begin].append(e)
    return out


def viterbi(lattice: Lattice) -> PathResult:
    """Maximum-score path from 0 to L.

    Ties break toward fewer pieces, then toward the candidate whose final
    edge begins earliest (i.e. the longest last edge), which makes the result
    deterministic.
    """
    length = lattice.length
    if length == 0:
        return PathResult((), (), 0.0)
    best_score = [_NEG_INF] * (length + 1)
    best_score[0] = 0.0
    # Piece counts start at a sentinel so the first arrival always wins the
    # tie even when the arriving score is -inf (zero-probability pieces).
    best_npieces = [1 << 62] * (length + 1)
    best_npieces[0] = 0
    back: list[LatticeEdge | None] = [None] * (length + 1)
    out = _out_edges(lattice)
    for begin in range(length):
        s0 = best_score[begin]
        if s0 == _NEG_INF:
            continue
        n1 = best_npieces[begin] + 1
        for e in out[begin]:
            end = e.end
            s = s0 + e.score
            incumbent = back[end]
            if (
                s > best_score[end]
                or (
                    s == best_score[end]
                    and (
                        n1 < best_npieces[end]
                        or (n1 == best_npieces[end] and incumbent is not None and begin < incumbent.begin)
                    )
                )
            ):
                best_score[end] = s
                best_npieces[end] = n1
                back[end] = e
    if back[length] is None:
        return PathResult((), (), _NEG_INF)
    rev: list[LatticeEdge] = []
    pos = length
    while pos > 0:
        e = back[pos]
        rev.append(e)
        pos = e.begin
    rev.reverse()
    return PathResult(
        tuple(e.piece_id for e in rev),
        tuple((e.begin, e.end) for e in rev),
        best_score[length],
    )


def forward_backward(lattice: Lattice) -> ExpectedCounts:
    """Total path log-likelihood and expected per-piece usage counts.

    Computed entirely in log space with a stable log-sum-exp, so underflow is
    unreachable by construction.  The inner loops are written with tuple
    indexing because this is the EM E-step hot path.
    """
    length = lattice.length
    if length == 0:
        return ExpectedCounts({}, 0.0)
    incoming: list[list[LatticeEdge]] = [[] for _ in range(length + 1)]
    outgoing: list[list[LatticeEdge]] = [[] for _ in range(length + 1)]
    for e in lattice.edges:
        incoming[e[1]].append(e)
        outgoing[e[0]].append(e)
    exp_ = math.exp
    log_ = math.log
    alpha = [_NEG_INF] * (length + 1)
    alpha[0] = 0.0
    for pos in range(1, length + 1):
        best = _NEG_INF
        values = []
        for e in incoming[pos]:
            v = alpha[e[0]] + e[3]
            values.append(v)
            if v > best:
                best = v
        if best == _NEG_INF:
            continue
        acc = 0.0
        for v in values:
            acc += exp_(v - best)
        alpha[pos] = best + log_(acc)
    beta = [_NEG_INF] * (length + 1)
    beta[length] = 0.0
    for pos in range(length - 1, -1, -1):
        best = _NEG_INF
        values = []
        for e in outgoing[pos]:
            v = e[3] + beta[e[1]]
            values.append(v)
            if v > best:
                best = v
        if best == _NEG_INF:
            continue
        acc = 0.0
        for v in values:
            acc += exp_(v - best)
        beta[pos] = best + log_(acc)
    total = alpha[length]
    counts: dict[int, float] = {}
    get = counts.get
    for begin, end, piece_id, score in lattice.edges:
        weight = alpha[begin] + score + beta[end] - total
        if weight != _NEG_INF:
            counts[piece_id] = get(piece_id, 0.0) + exp_(weight)
    return ExpectedCounts(counts, total)


def enumerate_segmentations(
    text: str,
    vocab: Vocabulary,
    max_piece_len: int = DEFAULT_MAX_PIECE_LEN,
    unk_penalty: float = DEFAULT_UNK_PENALTY,
) -> list[PathResult]:
    """Every complete segmentation path with its exact score (testing oracle).

    Guarded to short texts; the path count is exponential in the length.
    """
    if len(text) > ENUMERATION_GUARD:
        raise TextTooLongError(
            f"text of length {len(text)} exceeds the enumeration guard ({ENUMERATION_GUARD})"
        )
    lattice = build_lattice(text, vocab, max_piece_len, unk_penalty)
    out = _out_edges(lattice)
    results: list[PathResult] = []
    stack: list[LatticeEdge] = []

    def walk(pos: int, score: float) -> None:
        if pos == lattice.length:
            results.append(
                PathResult(
                    tuple(e.piece_id for e in stack),
                    tuple((e.begin, e.end) for e in stack),
                    score,
                )
            )
            return
        for e in out[pos]:
            stack.append(e)
            walk(e.end, score + e.score)
            stack.pop()

    walk(0, 0.0)
    return results
