import random
from collections import Counter

import pytest

from mixtok import mmlm
from mixtok import tokenizer as tok
from mixtok import vocab as vb
from mixtok.errors import MissingCharPieceError

CHARS = "甲乙丙丁戊己庚辛"
WORDS = ["甲乙", "丙丁戊", "己庚辛丙", "乙丙"]


def masking_vocab(drop_char: str | None = None) -> vb.Vocabulary:
    pieces = [
        vb.Piece(ch, -3.0, vb.PieceKind.CHAR) for ch in CHARS if ch != drop_char
    ]
    pieces += [vb.Piece(w, -2.0, vb.PieceKind.WORD) for w in WORDS]
    return vb.Vocabulary(vb.special_pieces() + pieces)


def word_sequence(vocab: vb.Vocabulary, surfaces: list[str]) -> tok.TokenSequence:
    ids = []
    spans = []
    pos = 0
    for s in surfaces:
        ids.append(vocab.id_of(s))
        spans.append((pos, pos + len(s)))
        pos += len(s)
    return tok.add_specials(tok.TokenSequence(tuple(ids), tuple(spans), tok.MODE_MIXED))


def cfg(**kw):
    return mmlm.MaskingConfig(**kw)


class TestConfig:
    def test_action_probs_must_sum_to_one(self):
        with pytest.raises(ValueError):
            cfg(action_probs=(0.8, 0.1, 0.2))

    def test_ngram_probs_arity(self):
        with pytest.raises(ValueError):
            cfg(ngram_probs=(0.5, 0.5))

    def test_rate_bounds(self):
        with pytest.raises(ValueError):
            cfg(mask_rate=-0.1)
        with pytest.raises(ValueError):
            cfg(cmlm_rate=1.5)

    def test_boundary_rates_allowed(self):
        cfg(mask_rate=0.0)
        cfg(mask_rate=1.0)


class TestRngStream:
    def test_deterministic_per_ordinal(self):
        a = mmlm.example_rng(7, 3).random()
        b = mmlm.example_rng(7, 3).random()
        c = mmlm.example_rng(7, 4).random()
        assert a == b and a != c


class TestSelectSpans:
    def test_zero_budget(self):
        seq = word_sequence(masking_vocab(), ["甲乙", "丙丁戊"])
        got = mmlm.select_spans(seq, cfg(mask_rate=0.15), mmlm.example_rng(0, 0))
        assert got == []

    def test_full_budget_covers_every_word(self):
        vocab = masking_vocab()
        seq = word_sequence(vocab, ["甲乙", "丙丁戊", "甲", "乙", "乙丙"])
        got = mmlm.select_spans(seq, cfg(mask_rate=1.0), mmlm.example_rng(0, 0))
        covered = {p for begin, end in got for p in range(begin, end)}
        assert covered == set(range(1, 6))

    def test_spans_never_overlap_or_touch_specials(self):
        vocab = masking_vocab()
        seq = word_sequence(vocab, ["甲", "乙", "丙", "丁", "戊", "己", "庚", "辛"] * 4)
        for ordinal in range(200):
            spans = mmlm.select_spans(
                seq, cfg(mask_rate=0.4), mmlm.example_rng(1, ordinal)
            )
            seen = set()
            for begin, end in spans:
                assert 1 <= begin < end <= len(seq) - 1
                positions = set(range(begin, end))
                assert not positions & seen
                seen |= positions

    def test_overshoot_bounded(self):
        vocab = masking_vocab()
        seq = word_sequence(vocab, ["甲"] * 40)
        for ordinal in range(100):
            config = cfg(mask_rate=0.15)
            spans = mmlm.select_spans(seq, config, mmlm.example_rng(2, ordinal))
            covered = sum(end - begin for begin, end in spans)
            budget = int(0.15 * 40)
            assert budget <= covered <= budget + 3

    def test_ngram_sampler_distribution(self):
        rng = mmlm.example_rng(3, 0)
        probs = (0.4, 0.3, 0.2, 0.1)
        counts = Counter(mmlm.draw_span_length(rng, probs) for _ in range(40000))
        for n, p in enumerate(probs, start=1):
            assert counts[n] / 40000 == pytest.approx(p, abs=0.02)


class TestAssignActions:
    def test_mlm_never_expands(self):
        vocab = masking_vocab()
        seq = word_sequence(vocab, ["甲乙", "丙丁戊", "乙丙"])
        spans = [(1, 4)]
        for ordinal in range(200):
            plan = mmlm.assign_actions(
                spans, seq, vocab, cfg(task="mlm"), mmlm.example_rng(4, ordinal)
            )
            assert all(d.action != mmlm.EXPAND_CHARS for d in plan.decisions)

    def test_single_char_words_never_expand(self):
        vocab = masking_vocab()
        seq = word_sequence(vocab, ["甲", "乙", "丙"])
        spans = [(1, 4)]
        for ordinal in range(200):
            plan = mmlm.assign_actions(
                spans, seq, vocab, cfg(cmlm_rate=1.0), mmlm.example_rng(5, ordinal)
            )
            assert all(d.action != mmlm.EXPAND_CHARS for d in plan.decisions)

    def test_every_span_word_gets_a_decision(self):
        vocab = masking_vocab()
        seq = word_sequence(vocab, ["甲乙", "丙", "乙丙", "丁"])
        spans = [(1, 3), (4, 5)]
        plan = mmlm.assign_actions(spans, seq, vocab, cfg(), mmlm.example_rng(6, 0))
        assert [d.word_index for d in plan.decisions] == [1, 2, 4]

    def test_action_distribution(self):
        vocab = masking_vocab()
        seq = word_sequence(vocab, ["甲"] * 100)
        spans = [(i, i + 1) for i in range(1, 101)]
        counts = Counter()
        for ordinal in range(600):
            plan = mmlm.assign_actions(
                spans, seq, vocab, cfg(task="mlm"), mmlm.example_rng(7, ordinal)
            )
            counts.update(d.action for d in plan.decisions)
        total = sum(counts.values())
        assert counts[mmlm.MASK_WORD] / total == pytest.approx(0.8, abs=0.01)
        assert counts[mmlm.RANDOM_WORD] / total == pytest.approx(0.1, abs=0.01)
        assert counts[mmlm.KEEP] / total == pytest.approx(0.1, abs=0.01)

    def test_expand_rate_among_multichar(self):
        vocab = masking_vocab()
        seq = word_sequence(vocab, ["甲乙"] * 100)
        spans = [(i, i + 1) for i in range(1, 101)]
        expanded = 0
        total = 0
        for ordinal in range(600):
            plan = mmlm.assign_actions(spans, seq, vocab, cfg(), mmlm.example_rng(8, ordinal))
            total += len(plan.decisions)
            expanded += sum(d.action == mmlm.EXPAND_CHARS for d in plan.decisions)
        assert expanded / total == pytest.approx(0.20, abs=0.01)

    def test_random_replacements_are_non_special(self):
        vocab = masking_vocab()
        seq = word_sequence(vocab, ["甲"] * 50)
        spans = [(i, i + 1) for i in range(1, 51)]
        for ordinal in range(100):
            plan = mmlm.assign_actions(spans, seq, vocab, cfg(), mmlm.example_rng(9, ordinal))
            for d in plan.decisions:
                if d.action == mmlm.RANDOM_WORD:
                    assert 5 <= d.replacement_id < len(vocab)


class TestApplyPlan:
    def test_empty_plan_is_identity_with_padding(self):
        vocab = masking_vocab()
        seq = word_sequence(vocab, ["甲乙", "丙"])
        ex = mmlm.apply_plan(seq, mmlm.MaskingPlan(), vocab, cfg(max_len=8))
        assert ex.input_ids == seq.piece_ids + (0,) * 4
        assert all(l == mmlm.SENTINEL_LABEL for l in ex.labels)
        assert ex.attention == (1, 1, 1, 1, 0, 0, 0, 0)

    def test_expansion_emits_char_masks(self):
        vocab = masking_vocab()
        seq = word_sequence(vocab, ["甲", "丙丁戊"])
        plan = mmlm.MaskingPlan((mmlm.Decision(2, mmlm.EXPAND_CHARS),))
        ex = mmlm.apply_plan(seq, plan, vocab, cfg(max_len=8))
        assert ex.input_ids[2:5] == (vb.MASK_ID,) * 3
        assert ex.labels[2:5] == tuple(vocab.char_id(c) for c in "丙丁戊")

    def test_positional_shift_oracle(self):
        # Expanding a 4-char word grows the output by 3 and leaves all other
        # positions' inputs/labels identical to the unexpanded layout.
        vocab = masking_vocab()
        surfaces = ["甲乙", "己庚辛丙", "丁", "乙丙"]
        seq = word_sequence(vocab, surfaces)
        p = 2  # the 4-char word
        base = mmlm.apply_plan(seq, mmlm.MaskingPlan(), vocab, cfg(max_len=16))
        plan = mmlm.MaskingPlan((mmlm.Decision(p, mmlm.EXPAND_CHARS),))
        ex = mmlm.apply_plan(seq, plan, vocab, cfg(max_len=16))
        grown = sum(ex.attention) - sum(base.attention)
        assert grown == 3
        assert ex.input_ids[:p] == base.input_ids[:p]
        assert ex.labels[:p] == base.labels[:p]
        assert ex.input_ids[p + 4 : sum(ex.attention)] == base.input_ids[p + 1 : sum(base.attention)]
        assert ex.labels[p + 4 : sum(ex.attention)] == base.labels[p + 1 : sum(base.attention)]

    def test_actions(self):
        vocab = masking_vocab()
        seq = word_sequence(vocab, ["甲", "乙", "丙"])
        rid = vocab.id_of("甲乙")
        plan = mmlm.MaskingPlan(
            (
                mmlm.Decision(1, mmlm.MASK_WORD),
                mmlm.Decision(2, mmlm.RANDOM_WORD, rid),
                mmlm.Decision(3, mmlm.KEEP),
            )
        )
        ex = mmlm.apply_plan(seq, plan, vocab, cfg(max_len=8))
        original = seq.piece_ids
        assert ex.input_ids[1] == vb.MASK_ID and ex.labels[1] == original[1]
        assert ex.input_ids[2] == rid and ex.labels[2] == original[2]
        assert ex.input_ids[3] == original[3] and ex.labels[3] == original[3]

    def test_expansion_overflow_falls_back_to_mask(self):
        vocab = masking_vocab()
        seq = word_sequence(vocab, ["己庚辛丙", "甲"])
        plan = mmlm.MaskingPlan((mmlm.Decision(1, mmlm.EXPAND_CHARS),))
        ex = mmlm.apply_plan(seq, plan, vocab, cfg(max_len=4))
        # no room to grow: single [MASK] with the word id as label
        assert ex.input_ids[1] == vb.MASK_ID
        assert ex.labels[1] == seq.piece_ids[1]
        assert sum(ex.attention) == 4

    def test_missing_char_piece_is_an_error(self):
        broken = masking_vocab(drop_char="丁")
        seq = word_sequence(broken, ["丙丁戊"])
        plan = mmlm.MaskingPlan((mmlm.Decision(1, mmlm.EXPAND_CHARS),))
        with pytest.raises(MissingCharPieceError):
            mmlm.apply_plan(seq, plan, broken, cfg(max_len=8))

    def test_truncation_keeps_final_sep(self):
        vocab = masking_vocab()
        seq = word_sequence(vocab, ["甲"] * 20)
        ex = mmlm.apply_plan(seq, mmlm.MaskingPlan(), vocab, cfg(max_len=10))
        assert len(ex.input_ids) == 10
        assert ex.input_ids[0] == vb.CLS_ID and ex.input_ids[9] == vb.SEP_ID
        assert all(a == 1 for a in ex.attention)


class TestMakeExample:
    def test_deterministic(self):
        vocab = masking_vocab()
        line = "甲乙丙丁戊己庚辛甲乙丙"
        a = mmlm.make_example(line, vocab, cfg(max_len=16), 5)
        b = mmlm.make_example(line, vocab, cfg(max_len=16), 5)
        assert a == b

    def test_distinct_ordinals_differ_eventually(self):
        vocab = masking_vocab()
        line = "甲乙丙丁戊己庚辛" * 4
        examples = {
            mmlm.make_example(line, vocab, cfg(max_len=64, mask_rate=0.5), i)
            for i in range(8)
        }
        assert len(examples) > 1

    def test_mlm_task_has_no_expansions(self):
        # Without expansions the layout never grows and every label equals
        # the original token at the same position.
        vocab = masking_vocab()
        line = "甲乙丙丁戊己庚辛" * 4
        original = tok.add_specials(tok.encode(line, vocab)).piece_ids
        config = cfg(task="mlm", max_len=64, mask_rate=0.9)
        for ordinal in range(50):
            ex = mmlm.make_example(line, vocab, config, ordinal)
            assert sum(ex.attention) == len(original)
            for pos, label in enumerate(ex.labels):
                if label != mmlm.SENTINEL_LABEL:
                    assert label == original[pos]


class TestReconstruction:
    def test_substituting_labels_recovers_original(self):
        vocab = masking_vocab()
        rng = random.Random(11)
        config = cfg(max_len=96, mask_rate=0.4)
        for ordinal in range(120):
            line = "".join(
                rng.choice(WORDS + list(CHARS)) for _ in range(rng.randint(3, 12))
            )
            original = tok.add_specials(tok.encode(line, vocab))
            ex = mmlm.make_example(line, vocab, config, ordinal)
            # re-derive the plan from the same rng stream
            stream = mmlm.example_rng(config.seed, ordinal)
            spans = mmlm.select_spans(original, config, stream)
            plan = mmlm.assign_actions(spans, original, vocab, config, stream)
            rebuilt: list[int] = []
            cursor = 0
            by_pos = {d.word_index: d for d in plan.decisions}
            for pos, pid in enumerate(original.piece_ids):
                d = by_pos.get(pos)
                if d is not None and d.action == mmlm.EXPAND_CHARS:
                    k = len(vocab.piece(pid).surface)
                    chars = [
                        vocab.piece(label).surface
                        for label in ex.labels[cursor : cursor + k]
                    ]
                    assert "".join(chars) == vocab.piece(pid).surface
                    rebuilt.append(pid)
                    cursor += k
                    continue
                if d is None:
                    assert ex.labels[cursor] == mmlm.SENTINEL_LABEL
                    rebuilt.append(ex.input_ids[cursor])
                else:
                    assert ex.labels[cursor] == pid
                    rebuilt.append(ex.labels[cursor])
                cursor += 1
            assert tuple(rebuilt) == original.piece_ids

    def test_every_mask_position_is_labeled(self):
        vocab = masking_vocab()
        config = cfg(max_len=64, mask_rate=0.6)
        for ordinal in range(60):
            ex = mmlm.make_example("甲乙丙丁戊己庚辛" * 3, vocab, config, ordinal)
            for inp, label in zip(ex.input_ids, ex.labels):
                if inp == vb.MASK_ID:
                    assert label != mmlm.SENTINEL_LABEL
