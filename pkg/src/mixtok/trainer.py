"""Unigram language-model vocabulary training.

Pipeline: exhaustive n-gram seeding, EM probability estimation over the
segmentation lattice, and iterative likelihood-loss pruning down to the
target size.  Everything is deterministic: candidate orders are total and
count reduction happens in corpus line order.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import lattice as lat
from .errors import EmptyCorpusError, TargetTooSmallError
from .vocab import (
    SPECIAL_SURFACES,
    Piece,
    PieceKind,
    Vocabulary,
    build_final,
    special_pieces,
)

LogProbs = dict[str, float]
CandidateSet = dict[str, float]


@dataclass(frozen=True)
class TrainerConfig:
    target_size: int = 40000
    seed_size: int | None = None  # None -> 4 * target_size
    max_piece_len: int = 8
    em_iters_per_round: int = 2
    shrink_keep_ratio: float = 0.75
    char_coverage: float = 1.0
    seed: int = 0
    unk_penalty: float = lat.DEFAULT_UNK_PENALTY

    def __post_init__(self):
        if self.target_size < 5:
            raise ValueError("target_size must be >= 5")
        if self.seed_size is not None and self.seed_size < self.target_size:
            raise ValueError("seed_size must be >= target_size")
        if self.max_piece_len < 1:
            raise ValueError("max_piece_len must be >= 1")
        if self.em_iters_per_round < 1:
            raise ValueError("em_iters_per_round must be >= 1")
        if not 0.0 < self.shrink_keep_ratio < 1.0:
            raise ValueError("shrink_keep_ratio must be in (0, 1)")
        if not 0.0 < self.char_coverage <= 1.0:
            raise ValueError("char_coverage must be in (0, 1]")

    @property
    def resolved_seed_size(self) -> int:
        return self.seed_size if self.seed_size is not None else 4 * self.target_size


def _is_clean_surface(surface: str) -> bool:
    if " " in surface:
        return False
    return not any(special in surface for special in SPECIAL_SURFACES)


def seed_vocabulary(corpus: Iterable[str], cfg: TrainerConfig) -> CandidateSet:
    """Initial candidates: covered characters plus the best substrings.

    Characters are taken by descending frequency until ``char_coverage`` of
    the character mass is reached.  Substrings of length 2..max_piece_len are
    ranked by count x length and fill the remaining seed budget.
    """
    char_counts: Counter[str] = Counter()
    ngram_counts: Counter[str] = Counter()
    max_len = cfg.max_piece_len
    for text in corpus:
        char_counts.update(text)
        for n in range(2, max_len + 1):
            for i in range(len(text) - n + 1):
                ngram_counts[text[i : i + n]] += 1
    for bad in [c for c in char_counts if not _is_clean_surface(c)]:
        del char_counts[bad]
    if not char_counts:
        raise EmptyCorpusError("corpus has no usable characters")

    total_chars = sum(char_counts.values())
    threshold = cfg.char_coverage * total_chars
    covered: CandidateSet = {}
    cumulative = 0
    for ch, count in sorted(char_counts.items(), key=lambda kv: (-kv[1], kv[0])):
        if cumulative >= threshold:
            break
        covered[ch] = float(count)
        cumulative += count

    room = max(0, cfg.resolved_seed_size - len(covered))
    ranked = sorted(
        ((s, c) for s, c in ngram_counts.items() if _is_clean_surface(s)),
        key=lambda kv: (-kv[1] * len(kv[0]), len(kv[0]), kv[0]),
    )
    candidates = dict(covered)
    for s, c in ranked[:room]:
        candidates[s] = float(c)
    return candidates


def initial_log_probs(candidates: CandidateSet) -> LogProbs:
    """Normalized log relative frequencies of the seed counts."""
    total = math.fsum(candidates.values())
    return {s: math.log(c / total) for s, c in candidates.items()}


def _interim_vocabulary(log_probs: LogProbs) -> Vocabulary:
    pieces = [
        Piece(s, lp, PieceKind.CHAR if len(s) == 1 else PieceKind.WORD)
        for s, lp in sorted(log_probs.items(), key=lambda kv: (len(kv[0]), kv[0]))
    ]
    return Vocabulary(special_pieces() + pieces)


def em_step(
    corpus: Sequence[str], log_probs: LogProbs, cfg: TrainerConfig
) -> tuple[LogProbs, float]:
    """One EM iteration.

    E-step accumulates forward-backward expected counts over all lines (in
    line order, so the reduction is bit-reproducible); M-step renormalizes.
    Returns the updated log-probabilities and the corpus log-likelihood under
    the *input* probabilities.
    """
    vocab = _interim_vocabulary(log_probs)
    acc = [0.0] * len(vocab.pieces)
    log_likelihood = 0.0
    for text in corpus:
        grid = lat.build_lattice(text, vocab, cfg.max_piece_len, cfg.unk_penalty)
        expected = lat.forward_backward(grid)
        log_likelihood += expected.total_log_likelihood
        for pid, count in expected.counts.items():
            acc[pid] += count
    total = math.fsum(acc[5:])
    updated: LogProbs = {}
    for s in log_probs:
        count = acc[vocab.id_of(s)]
        updated[s] = math.log(count / total) if count > 0.0 else float("-inf")
    return updated, log_likelihood


def viterbi_usage(
    corpus: Iterable[str], log_probs: LogProbs, cfg: TrainerConfig
) -> Counter[str]:
    """How often each piece appears on the corpus Viterbi paths."""
    vocab = _interim_vocabulary(log_probs)
    surfaces = [p.surface for p in vocab.pieces]
    usage: Counter[str] = Counter()
    for text in corpus:
        grid = lat.build_lattice(text, vocab, cfg.max_piece_len, cfg.unk_penalty)
        for pid in lat.viterbi(grid).piece_ids:
            if pid >= 5:
                usage[surfaces[pid]] += 1
    return usage


def _alternative_score(surface: str, vocab: Vocabulary, cfg: TrainerConfig) -> float:
    """Best segmentation score of ``surface`` using every piece but itself."""
    grid = lat.build_lattice(surface, vocab, cfg.max_piece_len, cfg.unk_penalty)
    own = vocab.id_of(surface)
    kept = tuple(
        e for e in grid.edges if not (e.begin == 0 and e.end == grid.length and e.piece_id == own)
    )
    return lat.viterbi(lat.Lattice(grid.length, kept)).score


def prune(
    corpus: Sequence[str],
    log_probs: LogProbs,
    keep_ratio: float,
    protected: set[str],
    cfg: TrainerConfig,
    min_keep: int = 0,
) -> LogProbs:
    """Drop the unprotected pieces whose removal costs the least likelihood.

    The loss of removing a piece is approximated by rerouting its Viterbi
    usages through the best remaining segmentation of its own surface; unused
    pieces have loss 0 and go first.  Keeps ceil(keep_ratio x unprotected)
    pieces, but never fewer than ``min_keep``.
    """
    unprotected = [s for s in log_probs if s not in protected]
    keep_count = min(
        len(unprotected), max(math.ceil(keep_ratio * len(unprotected)), min_keep)
    )
    if keep_count == len(unprotected):
        return dict(log_probs)
    usage = viterbi_usage(corpus, log_probs, cfg)
    vocab = _interim_vocabulary(log_probs)
    loss: dict[str, float] = {}
    for s in unprotected:
        used = usage.get(s, 0)
        if used == 0:
            loss[s] = 0.0
            continue
        alt = _alternative_score(s, vocab, cfg)
        loss[s] = used * (log_probs[s] - alt)
    ranked = sorted(unprotected, key=lambda s: (-loss[s], len(s), s))
    kept = set(ranked[:keep_count])
    return {s: lp for s, lp in log_probs.items() if s in protected or s in kept}


def train(corpus: Sequence[str], cfg: TrainerConfig) -> Vocabulary:
    """Full training loop: seed, then (EM x em_iters_per_round, prune) until
    the candidates fit ``target_size - 5``, then final assembly."""
    corpus = list(corpus)
    candidates = seed_vocabulary(corpus, cfg)
    protected = {s for s in candidates if len(s) == 1}
    word_room = cfg.target_size - 5 - len(protected)
    if word_room < 0:
        raise TargetTooSmallError(
            f"target_size {cfg.target_size} cannot fit 5 specials plus "
            f"{len(protected)} covered characters"
        )
    log_probs = initial_log_probs(candidates)
    while len(log_probs) > cfg.target_size - 5:
        for _ in range(cfg.em_iters_per_round):
            log_probs, _ = em_step(corpus, log_probs, cfg)
        before = len(log_probs)
        log_probs = prune(
            corpus, log_probs, cfg.shrink_keep_ratio, protected, cfg, min_keep=word_room
        )
        if len(log_probs) == before:
            # keep_ratio rounded to a no-op; cut straight to the target
            log_probs = prune(corpus, log_probs, 0.0, protected, cfg, min_keep=word_room)
    pieces = [
        Piece(s, lp, PieceKind.CHAR if len(s) == 1 else PieceKind.WORD)
        for s, lp in log_probs.items()
    ]
    return build_final(pieces, cfg.target_size, protected)


def train_char_vocab(corpus: Iterable[str], cfg: TrainerConfig) -> Vocabulary:
    """Character-granularity vocabulary: specials plus covered characters only.

    The vocabulary size is whatever coverage dictates; no word pieces, no EM.
    """
    char_cfg = TrainerConfig(
        target_size=5,
        seed_size=5,
        max_piece_len=1,
        char_coverage=cfg.char_coverage,
        seed=cfg.seed,
        unk_penalty=cfg.unk_penalty,
    )
    candidates = seed_vocabulary(corpus, char_cfg)
    total = math.fsum(candidates.values())
    pieces = [
        Piece(s, math.log(c / total), PieceKind.CHAR)
        for s, c in candidates.items()
    ]
    pieces.sort(key=lambda p: (-p.log_prob, len(p.surface), p.surface))
    return Vocabulary(special_pieces() + pieces)
