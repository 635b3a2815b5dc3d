"""Static word vectors and the 70-symbol character one-hot alphabet."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError

LETTERS = "abcdefghijklmnopqrstuvwxyz"
DIGITS = "0123456789"
# The typeset table lists `` and '' as two distinct quote symbols; they are
# read here as the left curly quote and the ASCII double quote.
OTHERS = (",", ";", ".", "!", "?", ":", "`", "'", "“", '"', "/", "\\", "|", "_", "@", "#",
          "$", "%", "^", "&", "*", "~", "+", "-", "=", "<", ">", "(", ")", "[", "]", "{", "}")
UNKNOWN_CHAR = "<unk>"


@dataclass(frozen=True)
class CharAlphabet:
    symbols: tuple

    def __post_init__(self):
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet symbols must be distinct")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.symbols)})

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def unknown_index(self) -> int:
        return len(self.symbols) - 1

    def index(self, ch: str) -> int:
        return self._index.get(ch, self.unknown_index)


DEFAULT_ALPHABET = CharAlphabet(tuple(LETTERS) + tuple(DIGITS) + OTHERS + (UNKNOWN_CHAR,))
assert DEFAULT_ALPHABET.size == 70


@dataclass
class CharEncoding:
    matrix: np.ndarray  # (l, alphabet size)
    valid_length: int


def char_indices(token_text: str, alphabet: CharAlphabet = DEFAULT_ALPHABET, max_len: int = 30) -> list[int]:
    if not token_text:
        raise ValueError("cannot encode an empty token")
    if max_len < 1:
        raise ValueError(f"max char length must be >= 1, got {max_len}")
    return [alphabet.index(ch) for ch in token_text.lower()[:max_len]]


def encode_chars(token_text: str, alphabet: CharAlphabet = DEFAULT_ALPHABET, max_len: int = 30) -> CharEncoding:
    """One-hot rows for the (case-folded, truncated) token; unused rows stay zero."""
    idx = char_indices(token_text, alphabet, max_len)
    m = np.zeros((max_len, alphabet.size))
    m[np.arange(len(idx)), idx] = 1.0
    return CharEncoding(m, len(idx))


@dataclass
class EmbeddingTable:
    words: list[str]
    vectors: np.ndarray  # (V, d)
    unk_vector: np.ndarray

    def __post_init__(self):
        self.index = {}
        for i, w in enumerate(self.words):
            self.index.setdefault(w, i)

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index


def resolve_index(index: dict, token_text: str):
    """Exact match, then lowercase match, else None."""
    i = index.get(token_text)
    if i is None:
        i = index.get(token_text.lower())
    return i


def lookup_word(table: EmbeddingTable, token_text: str) -> np.ndarray:
    i = resolve_index(table.index, token_text)
    return table.unk_vector if i is None else table.vectors[i]


def load_word_vectors(path) -> EmbeddingTable:
    """Read a text vector file (``word v1 ... vd`` per line, optional ``count dim`` header)."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such embedding file: {path}")
    words, rows = [], []
    dim = None
    with open(path, encoding="utf-8") as fh:
        lines = [(n, ln.rstrip("\n")) for n, ln in enumerate(fh, start=1)]
    lines = [(n, ln) for n, ln in lines if ln.strip()]
    if lines and _looks_like_header(lines):
        lines = lines[1:]
    for lineno, line in lines:
        parts = line.rstrip().split(" ")
        if len(parts) < 2:
            raise DataError(f"{path}:{lineno}: expected a word followed by numbers")
        if dim is None:
            dim = len(parts) - 1
        elif len(parts) - 1 != dim:
            raise DataError(f"{path}:{lineno}: vector has dimension {len(parts) - 1}, expected {dim}")
        try:
            rows.append([float(x) for x in parts[1:]])
        except ValueError:
            raise DataError(f"{path}:{lineno}: non-numeric vector component") from None
        words.append(parts[0])
    if not words:
        raise DataError(f"{path}: no vectors found")
    vectors = np.asarray(rows, dtype=np.float64)
    return EmbeddingTable(words, vectors, vectors.mean(axis=0))


def _looks_like_header(lines) -> bool:
    parts = lines[0][1].split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        return False
    if len(lines) < 2:
        return True
    return len(lines[1][1].rstrip().split(" ")) == int(parts[1]) + 1


def random_table(words: Sequence[str], dim: int, rng: np.random.Generator, scale: float = 0.1) -> EmbeddingTable:
    """Random vectors for the given vocabulary (first occurrence wins, order kept)."""
    if dim < 1:
        raise ValueError(f"embedding dimension must be positive, got {dim}")
    vocab = list(dict.fromkeys(words))
    vectors = rng.normal(0.0, scale, size=(len(vocab), dim))
    unk = vectors.mean(axis=0) if len(vocab) else np.zeros(dim)
    return EmbeddingTable(vocab, vectors, unk)
