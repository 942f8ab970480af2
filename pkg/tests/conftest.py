from __future__ import annotations

import random

import pytest

from mixtok import vocab as vb

ALPHABET = "abc"


def toy_vocabulary() -> vb.Vocabulary:
    """The 5-piece vocabulary used throughout the lattice examples."""
    return vb.Vocabulary(
        vb.special_pieces()
        + [
            vb.Piece("a", -1.0, vb.PieceKind.CHAR),
            vb.Piece("b", -1.2, vb.PieceKind.CHAR),
            vb.Piece("c", -1.1, vb.PieceKind.CHAR),
            vb.Piece("ab", -1.5, vb.PieceKind.WORD),
            vb.Piece("bc", -1.8, vb.PieceKind.WORD),
        ]
    )


def random_toy_vocabulary(rng: random.Random) -> vb.Vocabulary:
    """Random subset of the substrings of length <= 3 over {a, b, c}.

    Characters may be missing, which exercises the UNK fallback edge.
    """
    pieces = []
    for ch in ALPHABET:
        if rng.random() < 0.75:
            pieces.append(vb.Piece(ch, rng.uniform(-3.0, -0.5), vb.PieceKind.CHAR))
    for first in ALPHABET:
        for second in ALPHABET:
            if rng.random() < 0.4:
                pieces.append(
                    vb.Piece(first + second, rng.uniform(-4.0, -1.0), vb.PieceKind.WORD)
                )
            for third in ALPHABET:
                if rng.random() < 0.15:
                    pieces.append(
                        vb.Piece(first + second + third, rng.uniform(-5.0, -1.5), vb.PieceKind.WORD)
                    )
    return vb.Vocabulary(vb.special_pieces() + pieces)


def all_strings(max_len: int, alphabet: str = ALPHABET) -> list[str]:
    out = []
    frontier = [""]
    for _ in range(max_len):
        frontier = [s + ch for s in frontier for ch in alphabet]
        out.extend(frontier)
    return out


@pytest.fixture
def toy_vocab() -> vb.Vocabulary:
    return toy_vocabulary()
