"""Mixed-granularity tokenizer and masked-LM pretraining data pipeline."""

from .errors import MixtokError
from .estimators import LatticeTokenizer, MaskedExampleBuilder, VocabularyTrainer
from .mmlm import MaskingConfig, TrainingExample, make_example
from .textnorm import NormalizedText, normalize, read_corpus
from .tokenizer import TokenSequence, add_specials, decode, encode
from .trainer import TrainerConfig, train, train_char_vocab
from .vocab import Piece, PieceKind, Vocabulary, build_final, load, save

__version__ = "0.1.0"

__all__ = [
    "LatticeTokenizer",
    "MaskedExampleBuilder",
    "MaskingConfig",
    "MixtokError",
    "NormalizedText",
    "Piece",
    "PieceKind",
    "TokenSequence",
    "TrainerConfig",
    "TrainingExample",
    "Vocabulary",
    "VocabularyTrainer",
    "add_specials",
    "build_final",
    "decode",
    "encode",
    "load",
    "make_example",
    "normalize",
    "read_corpus",
    "save",
    "train",
    "train_char_vocab",
    "__version__",
]
