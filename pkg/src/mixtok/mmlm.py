"""Masked-LM training-example generation.

Selected words come from spans of 1-4 consecutive non-special tokens drawn
until 15% of the words are covered.  Each selected word is then corrupted:
usually the 80/10/10 mask/random/keep draw, but under the mixed task 20% of
masked multi-character words are instead expanded into one [MASK] per
character, with the characters as prediction targets.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass
from typing import Sequence

from .errors import MissingCharPieceError
from .textnorm import normalize
from .tokenizer import MODE_MIXED, TokenSequence, add_specials, encode
from .vocab import MASK_ID, SPECIAL_IDS, Vocabulary

SENTINEL_LABEL = -100

TASK_MLM = "mlm"
TASK_MMLM = "mmlm"

MASK_WORD = "mask"
RANDOM_WORD = "random"
KEEP = "keep"
EXPAND_CHARS = "expand"


@dataclass(frozen=True)
class MaskingConfig:
    mask_rate: float = 0.15
    action_probs: tuple[float, float, float] = (0.8, 0.1, 0.1)
    cmlm_rate: float = 0.20
    ngram_probs: tuple[float, float, float, float] = (0.4, 0.3, 0.2, 0.1)
    max_len: int = 512
    seed: int = 0
    task: str = TASK_MMLM
    max_piece_len: int = 8

    def __post_init__(self):
        if not 0.0 <= self.mask_rate <= 1.0:
            raise ValueError("mask_rate must be in [0, 1]")
        if not 0.0 <= self.cmlm_rate <= 1.0:
            raise ValueError("cmlm_rate must be in [0, 1]")
        for name, probs, arity in (
            ("action_probs", self.action_probs, 3),
            ("ngram_probs", self.ngram_probs, 4),
        ):
            if len(probs) != arity:
                raise ValueError(f"{name} must have {arity} entries")
            if any(p < 0.0 for p in probs):
                raise ValueError(f"{name} entries must be nonnegative")
            if abs(math.fsum(probs) - 1.0) > 1e-9:
                raise ValueError(f"{name} must sum to 1")
        if self.max_len < 2:
            raise ValueError("max_len must fit [CLS] and [SEP]")
        if self.task not in (TASK_MLM, TASK_MMLM):
            raise ValueError(f"task must be {TASK_MLM!r} or {TASK_MMLM!r}")


@dataclass(frozen=True)
class Decision:
    word_index: int
    action: str
    replacement_id: int | None = None


@dataclass(frozen=True)
class MaskingPlan:
    decisions: tuple[Decision, ...] = ()


@dataclass(frozen=True)
class TrainingExample:
    """Fixed-length ids with aligned labels (-100 where not predicted) and
    attention flags (0 on padding)."""

    input_ids: tuple[int, ...]
    labels: tuple[int, ...]
    attention: tuple[int, ...]


def example_rng(seed: int, ordinal: int) -> random.Random:
    """Deterministic per-example stream; stable across runs and processes."""
    digest = hashlib.sha256(f"{seed}:{ordinal}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def draw_span_length(rng: random.Random, ngram_probs: Sequence[float]) -> int:
    """Sample n in {1..4} from the configured n-gram proportions."""
    r = rng.random()
    acc = 0.0
    for n, p in enumerate(ngram_probs, start=1):
        acc += p
        if r < acc:
            return n
    return len(ngram_probs)


def select_spans(
    seq: TokenSequence, cfg: MaskingConfig, rng: random.Random
) -> list[tuple[int, int]]:
    """Non-overlapping word spans covering ~mask_rate of the non-special words.

    Draws (n, start) pairs until the floor(mask_rate x words) budget is met;
    spans clip at covered neighbours, at specials, and at the sequence end,
    so the last span can overshoot the budget by at most n - 1 words.
    """
    word_positions = [i for i, pid in enumerate(seq.piece_ids) if pid not in SPECIAL_IDS]
    word_set = set(word_positions)
    budget = math.floor(cfg.mask_rate * len(word_positions))
    covered: set[int] = set()
    spans: list[tuple[int, int]] = []
    while len(covered) < budget:
        uncovered = [p for p in word_positions if p not in covered]
        if not uncovered:
            break
        n = draw_span_length(rng, cfg.ngram_probs)
        start = uncovered[rng.randrange(len(uncovered))]
        end = start + 1
        for k in range(1, n):
            nxt = start + k
            if nxt not in word_set or nxt in covered:
                break
            end = nxt + 1
        spans.append((start, end))
        covered.update(range(start, end))
    return sorted(spans)


def assign_actions(
    spans: Sequence[tuple[int, int]],
    seq: TokenSequence,
    vocab: Vocabulary,
    cfg: MaskingConfig,
    rng: random.Random,
) -> MaskingPlan:
    """Per-word corruption decisions for every word inside the given spans.

    Under the mixed task each word first draws the character-expansion flag
    with probability cmlm_rate; flagged multi-character words expand, all
    other words draw mask/random/keep.  Single-character flagged words fall
    back to the action draw (expansion would be the identity).
    """
    p_mask, p_random, _ = cfg.action_probs
    decisions: list[Decision] = []
    for start, end in sorted(spans):
        for pos in range(start, end):
            pid = seq.piece_ids[pos]
            surface = vocab.piece(pid).surface
            if (
                cfg.task == TASK_MMLM
                and rng.random() < cfg.cmlm_rate
                and len(surface) >= 2
            ):
                decisions.append(Decision(pos, EXPAND_CHARS))
                continue
            r = rng.random()
            if r < p_mask:
                decisions.append(Decision(pos, MASK_WORD))
            elif r < p_mask + p_random:
                replacement = rng.randrange(5, len(vocab)) if len(vocab) > 5 else pid
                decisions.append(Decision(pos, RANDOM_WORD, replacement))
            else:
                decisions.append(Decision(pos, KEEP))
    return MaskingPlan(tuple(decisions))


def apply_plan(
    seq: TokenSequence, plan: MaskingPlan, vocab: Vocabulary, cfg: MaskingConfig
) -> TrainingExample:
    """Materialize a fixed-length example from a plan.

    An expansion that would push the real-token length beyond max_len falls
    back to a plain word mask so examples stay fixed-length; a sequence that
    is too long even unexpanded is truncated in front of its final [SEP].
    """
    by_pos = {d.word_index: d for d in plan.decisions}
    # Accept expansions in order while they fit.
    projected = len(seq.piece_ids)
    expanded: set[int] = set()
    for d in plan.decisions:
        if d.action != EXPAND_CHARS:
            continue
        growth = len(vocab.piece(seq.piece_ids[d.word_index]).surface) - 1
        if projected + growth <= cfg.max_len:
            expanded.add(d.word_index)
            projected += growth
    input_ids: list[int] = []
    labels: list[int] = []
    for pos, pid in enumerate(seq.piece_ids):
        d = by_pos.get(pos)
        if d is None:
            input_ids.append(pid)
            labels.append(SENTINEL_LABEL)
        elif d.action == EXPAND_CHARS and pos in expanded:
            for ch in vocab.piece(pid).surface:
                cid = vocab.char_id(ch)
                if cid is None:
                    raise MissingCharPieceError(ch)
                input_ids.append(MASK_ID)
                labels.append(cid)
        elif d.action == RANDOM_WORD:
            input_ids.append(d.replacement_id)
            labels.append(pid)
        elif d.action == KEEP:
            input_ids.append(pid)
            labels.append(pid)
        else:  # MASK_WORD, or an expansion that no longer fits
            input_ids.append(MASK_ID)
            labels.append(pid)
    if len(input_ids) > cfg.max_len:
        sep = input_ids[-1]
        input_ids = input_ids[: cfg.max_len - 1] + [sep]
        labels = labels[: cfg.max_len - 1] + [SENTINEL_LABEL]
    real = len(input_ids)
    pad = cfg.max_len - real
    return TrainingExample(
        tuple(input_ids) + (0,) * pad,
        tuple(labels) + (SENTINEL_LABEL,) * pad,
        (1,) * real + (0,) * pad,
    )


def make_example(
    text: str, vocab: Vocabulary, cfg: MaskingConfig, ordinal: int
) -> TrainingExample:
    """Full pipeline for one line, deterministic in (cfg.seed, ordinal)."""
    rng = example_rng(cfg.seed, ordinal)
    seq = add_specials(encode(normalize(text), vocab, MODE_MIXED, cfg.max_piece_len))
    spans = select_spans(seq, cfg, rng)
    plan = assign_actions(spans, seq, vocab, cfg, rng)
    return apply_plan(seq, plan, vocab, cfg)
