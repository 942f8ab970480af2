"""Exception types shared across the pipeline."""

from __future__ import annotations


class MixtokError(Exception):
    """Base class for all mixtok errors."""


class InvalidEncodingError(MixtokError):
    """Input bytes are not valid UTF-8."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class EmptyCorpusError(MixtokError):
    """The corpus contained no usable text."""


class TargetTooSmallError(MixtokError):
    """Vocabulary target cannot fit the special tokens plus required characters."""


class MissingRequiredCharError(MixtokError):
    """A required character has no candidate piece."""

    def __init__(self, char: str):
        super().__init__(f"required character {char!r} has no candidate piece")
        self.char = char


class VocabFormatError(MixtokError):
    """A vocabulary file does not conform to the TSV format."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class DuplicateSurfaceError(VocabFormatError):
    """Two pieces share the same surface."""


class NonContiguousSpecialsError(VocabFormatError):
    """The five special tokens do not occupy ids 0-4 in order."""


class TextTooLongError(MixtokError):
    """Text exceeds the brute-force enumeration guard."""


class UnknownIdError(MixtokError):
    """A piece id is out of range for the vocabulary."""


class AlreadyHasSpecialsError(MixtokError):
    """add_specials called on a sequence that already carries specials."""


class MissingCharPieceError(MixtokError):
    """A character of an expanded word has no CHAR piece in the vocabulary."""

    def __init__(self, char: str):
        super().__init__(f"no CHAR piece for {char!r}; cannot expand word to characters")
        self.char = char


class ShardFormatError(MixtokError):
    """A shard file is malformed."""

    def __init__(self, message: str, path=None, line: int | None = None):
        loc = "" if path is None else f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(loc + message)
        self.path = path
        self.line = line


class FingerprintMismatchError(MixtokError):
    """Shards of one dataset carry different config fingerprints."""
