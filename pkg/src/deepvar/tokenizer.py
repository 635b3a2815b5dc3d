"""Offset-preserving tokenizer for variant-bearing biomedical sentences.

Rules, applied in order:

1. split on whitespace and on every character in ``split_chars``
   (split characters are separators and never appear in the output);
2. repeatedly strip trailing characters from ``strip_chars``; each stripped
   character becomes its own single-character token;
3. once, if what remains is wrapped by a bracket pair around a non-empty
   interior, emit the open bracket, the interior and the close bracket as
   three tokens.

So ``"(IL-2)"`` becomes ``["(", "IL-2", ")"]`` and ``"in ND3."`` becomes
``["in", "ND3", "."]``.

Known tension: ``_`` is a split character, so ``c.399_402del`` becomes two
tokens (``c.399``, ``402del``); an entity spanning both is tagged B-/I-.
The default strip set reads the ambiguous typeset quote glyphs as the ASCII
double quote and apostrophe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

DEFAULT_SPLIT_CHARS = frozenset('"#&$_*;/\\~!?={}')
DEFAULT_STRIP_CHARS = frozenset("\",.':")
DEFAULT_BRACKET_PAIRS = (("(", ")"), ("[", "]"), ("{", "}"))


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int

    def __post_init__(self):
        if not self.text or any(c.isspace() for c in self.text):
            raise ValueError(f"invalid token text {self.text!r}")
        if not 0 <= self.start < self.end or self.end - self.start != len(self.text):
            raise ValueError(f"invalid token offsets [{self.start}, {self.end}) for {self.text!r}")


@dataclass(frozen=True)
class TokenizerConfig:
    split_chars: frozenset = DEFAULT_SPLIT_CHARS
    strip_chars: frozenset = DEFAULT_STRIP_CHARS
    bracket_pairs: tuple = DEFAULT_BRACKET_PAIRS
    _close_of: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "split_chars", frozenset(self.split_chars))
        object.__setattr__(self, "strip_chars", frozenset(self.strip_chars))
        pairs = tuple((str(o), str(c)) for o, c in self.bracket_pairs)
        object.__setattr__(self, "bracket_pairs", pairs)
        for name in ("split_chars", "strip_chars"):
            for ch in getattr(self, name):
                if len(ch) != 1:
                    raise ValueError(f"{name} entries must be single characters, got {ch!r}")
                if ch.isalnum():
                    raise ValueError(f"{name} may not contain alphanumeric {ch!r}")
        for o, c in pairs:
            if len(o) != 1 or len(c) != 1:
                raise ValueError(f"bracket pair ({o!r}, {c!r}) must be single characters")
        object.__setattr__(self, "_close_of", dict(pairs))

    def to_dict(self) -> dict:
        return {
            "split_chars": sorted(self.split_chars),
            "strip_chars": sorted(self.strip_chars),
            "bracket_pairs": [list(p) for p in self.bracket_pairs],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TokenizerConfig":
        return cls(
            split_chars=frozenset(d.get("split_chars", DEFAULT_SPLIT_CHARS)),
            strip_chars=frozenset(d.get("strip_chars", DEFAULT_STRIP_CHARS)),
            bracket_pairs=tuple(tuple(p) for p in d.get("bracket_pairs", DEFAULT_BRACKET_PAIRS)),
        )


DEFAULT_CONFIG = TokenizerConfig()


def is_bracketed(token_text: str, pairs: Iterable[Sequence[str]] = DEFAULT_BRACKET_PAIRS) -> bool:
    """True iff the first and last characters form a configured pair around a non-empty interior."""
    if len(token_text) < 3:
        return False
    return any(token_text[0] == o and token_text[-1] == c for o, c in pairs)


def _chunks(text: str, split_chars: frozenset):
    start = None
    for i, ch in enumerate(text):
        if ch.isspace() or ch in split_chars:
            if start is not None:
                yield start, i
                start = None
        elif start is None:
            start = i
    if start is not None:
        yield start, len(text)


def _split_chunk(text: str, s: int, e: int, config: TokenizerConfig) -> list[Token]:
    trailing = []
    while e - s > 1 and text[e - 1] in config.strip_chars:
        e -= 1
        trailing.append(Token(text[e], e, e + 1))
    trailing.reverse()

    core = text[s:e]
    if is_bracketed(core, config.bracket_pairs):
        out = [Token(core[0], s, s + 1), Token(core[1:-1], s + 1, e - 1), Token(core[-1], e - 1, e)]
    else:
        out = [Token(core, s, e)]
    return out + trailing


def tokenize(text: str, config: TokenizerConfig = DEFAULT_CONFIG) -> list[Token]:
    tokens: list[Token] = []
    for s, e in _chunks(text, config.split_chars):
        tokens.extend(_split_chunk(text, s, e, config))
    return tokens
