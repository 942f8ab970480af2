"""Scikit-learn style wrappers so the pipeline composes with sklearn tooling.

All three estimators take iterables of raw text lines as ``X``; parameters
live in ``__init__`` so ``get_params``/``set_params``/``clone`` work as usual.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import tokenizer as tok
from .mmlm import MaskingConfig, TrainingExample, make_example
from .textnorm import normalize
from .trainer import TrainerConfig, train, train_char_vocab
from .vocab import Vocabulary


def check_texts(X) -> list[str]:
    """Validate an iterable of strings and return it normalized."""
    texts = list(X)
    for i, t in enumerate(texts):
        if not isinstance(t, str):
            raise TypeError(f"X[{i}] is {type(t).__name__}, expected str")
    return [normalize(t) for t in texts]


class VocabularyTrainer(BaseEstimator):
    """Learn a mixed- or character-granularity vocabulary from raw lines.

    After ``fit``, the learned :class:`Vocabulary` is ``self.vocabulary_``.
    """

    def __init__(
        self,
        vocab_size=40000,
        seed_size=None,
        max_piece_len=8,
        em_iters_per_round=2,
        shrink_keep_ratio=0.75,
        char_coverage=1.0,
        granularity="mixed",
        seed=0,
    ):
        self.vocab_size = vocab_size
        self.seed_size = seed_size
        self.max_piece_len = max_piece_len
        self.em_iters_per_round = em_iters_per_round
        self.shrink_keep_ratio = shrink_keep_ratio
        self.char_coverage = char_coverage
        self.granularity = granularity
        self.seed = seed

    def fit(self, X, y=None):
        if self.granularity not in ("mixed", "char"):
            raise ValueError("granularity must be 'mixed' or 'char'")
        texts = [t for t in check_texts(X) if t]
        cfg = TrainerConfig(
            target_size=self.vocab_size,
            seed_size=self.seed_size,
            max_piece_len=self.max_piece_len,
            em_iters_per_round=self.em_iters_per_round,
            shrink_keep_ratio=self.shrink_keep_ratio,
            char_coverage=self.char_coverage,
            seed=self.seed,
        )
        if self.granularity == "char":
            self.vocabulary_ = train_char_vocab(texts, cfg)
        else:
            self.vocabulary_ = train(texts, cfg)
        return self


class LatticeTokenizer(TransformerMixin, BaseEstimator):
    """Encode lines to piece-id lists (and back via ``inverse_transform``)."""

    def __init__(self, vocabulary=None, mode=tok.MODE_MIXED, max_piece_len=8):
        self.vocabulary = vocabulary
        self.mode = mode
        self.max_piece_len = max_piece_len

    def fit(self, X=None, y=None):
        if not isinstance(self.vocabulary, Vocabulary):
            raise ValueError("vocabulary must be a fitted Vocabulary instance")
        if self.mode not in (tok.MODE_MIXED, tok.MODE_CHAR):
            raise ValueError("mode must be 'mixed' or 'char'")
        self.vocabulary_ = self.vocabulary
        return self

    def transform(self, X) -> list[list[int]]:
        check_is_fitted(self, "vocabulary_")
        return [
            list(
                tok.encode(
                    text, self.vocabulary_, self.mode, self.max_piece_len
                ).piece_ids
            )
            for text in check_texts(X)
        ]

    def inverse_transform(self, X) -> list[str]:
        check_is_fitted(self, "vocabulary_")
        return [tok.decode(ids, self.vocabulary_) for ids in X]


class MaskedExampleBuilder(TransformerMixin, BaseEstimator):
    """Turn lines into fixed-length masked-LM training examples.

    ``transform`` assigns ordinals 0..n-1 in input order, so the output is a
    pure function of the lines and the parameters.
    """

    def __init__(
        self,
        vocabulary=None,
        mask_rate=0.15,
        action_probs=(0.8, 0.1, 0.1),
        cmlm_rate=0.20,
        ngram_probs=(0.4, 0.3, 0.2, 0.1),
        max_len=512,
        seed=0,
        task="mmlm",
        max_piece_len=8,
    ):
        self.vocabulary = vocabulary
        self.mask_rate = mask_rate
        self.action_probs = action_probs
        self.cmlm_rate = cmlm_rate
        self.ngram_probs = ngram_probs
        self.max_len = max_len
        self.seed = seed
        self.task = task
        self.max_piece_len = max_piece_len

    def _config(self) -> MaskingConfig:
        return MaskingConfig(
            mask_rate=self.mask_rate,
            action_probs=tuple(self.action_probs),
            cmlm_rate=self.cmlm_rate,
            ngram_probs=tuple(self.ngram_probs),
            max_len=self.max_len,
            seed=self.seed,
            task=self.task,
            max_piece_len=self.max_piece_len,
        )

    def fit(self, X=None, y=None):
        if not isinstance(self.vocabulary, Vocabulary):
            raise ValueError("vocabulary must be a fitted Vocabulary instance")
        self._config()  # validates parameters
        self.vocabulary_ = self.vocabulary
        return self

    def transform(self, X) -> list[TrainingExample]:
        check_is_fitted(self, "vocabulary_")
        cfg = self._config()
        return [
            make_example(text, self.vocabulary_, cfg, ordinal)
            for ordinal, text in enumerate(check_texts(X))
        ]
