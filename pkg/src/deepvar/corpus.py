"""Annotated sentences, the BIO tag set, span/tag conversion and corpus files.

On-disk BIO format (UTF-8, LF)::

    -DOCSTART- <doc_id>        optional, only at a sentence boundary
    token<TAB>tag               one line per token
                                blank line ends a sentence

Lines starting with ``"# "`` are comments and are skipped; tokens never contain
whitespace so such a line can not be a token line. Offset annotations are
``doc_id<TAB>char_start<TAB>char_end<TAB>type<TAB>surface`` against a raw-text
file holding ``doc_id<TAB>sentence`` per line.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError
from .tokenizer import DEFAULT_CONFIG, Token, TokenizerConfig, tokenize

logger = logging.getLogger(__name__)

ENTITY_TYPES = ("DNAMutation", "ProteinMutation", "SNP")
TAGS = (
    "O",
    "B-DNAMutation",
    "I-DNAMutation",
    "B-ProteinMutation",
    "I-ProteinMutation",
    "B-SNP",
)
TAG_INDEX = {t: i for i, t in enumerate(TAGS)}
OUTSIDE = 0
NUM_TAGS = len(TAGS)
# entity types whose spans are single-token only
SINGLE_TOKEN_TYPES = frozenset(t for t in ENTITY_TYPES if f"I-{t}" not in TAG_INDEX)


def tag_index(tag: str) -> int:
    try:
        return TAG_INDEX[tag]
    except KeyError:
        raise DataError(f"unknown tag {tag}") from None


def _split_tag(tag: str) -> tuple[str, str | None]:
    if tag == "O":
        return "O", None
    return tag[0], tag[2:]


@dataclass(frozen=True)
class EntitySpan:
    """An entity over tokens ``token_start..token_end`` (both inclusive)."""

    entity_type: str
    token_start: int
    token_end: int
    char_start: int | None = field(default=None, compare=False)
    char_end: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.entity_type not in ENTITY_TYPES:
            raise ValueError(f"unknown entity type {self.entity_type!r}")
        if self.token_start > self.token_end:
            raise ValueError(f"span start {self.token_start} > end {self.token_end}")

    @property
    def key(self) -> tuple[str, int, int]:
        return self.entity_type, self.token_start, self.token_end


@dataclass
class AnnotatedSentence:
    tokens: list[Token]
    tags: list[int]
    doc_id: str | None = None

    def __post_init__(self):
        if len(self.tokens) != len(self.tags):
            raise ValueError(f"{len(self.tokens)} tokens but {len(self.tags)} tags")

    def __len__(self):
        return len(self.tokens)

    @property
    def words(self) -> list[str]:
        return [t.text for t in self.tokens]

    @property
    def tag_names(self) -> list[str]:
        return [TAGS[i] for i in self.tags]

    def spans(self) -> list[EntitySpan]:
        return bio_to_spans(self.tags, self.tokens)


@dataclass
class DatasetSplit:
    train: list[AnnotatedSentence]
    validation: list[AnnotatedSentence]
    test: list[AnnotatedSentence] = field(default_factory=list)

    def sizes(self) -> dict[str, int]:
        return {"train": len(self.train), "validation": len(self.validation), "test": len(self.test)}


def bio_violation(tags: Sequence[int]) -> int | None:
    """Index of the first I-X not preceded by B-X/I-X, else None."""
    prev_type = None
    for i, t in enumerate(tags):
        prefix, typ = _split_tag(TAGS[t])
        if prefix == "I" and typ != prev_type:
            return i
        prev_type = typ
    return None


def spans_to_bio(tokens: Sequence, spans: Iterable[EntitySpan]) -> list[int]:
    tags = [OUTSIDE] * len(tokens)
    taken = [False] * len(tokens)
    for span in sorted(spans, key=lambda s: (s.token_start, s.token_end)):
        if span.token_end >= len(tokens) or span.token_start < 0:
            raise ValueError(f"span {span.key} outside sentence of {len(tokens)} tokens")
        if span.entity_type in SINGLE_TOKEN_TYPES and span.token_end != span.token_start:
            raise ValueError(f"multi-token {span.entity_type} span {span.key} has no I- tag")
        for i in range(span.token_start, span.token_end + 1):
            if taken[i]:
                raise ValueError(f"overlapping span {span.key}")
            taken[i] = True
        tags[span.token_start] = TAG_INDEX[f"B-{span.entity_type}"]
        for i in range(span.token_start + 1, span.token_end + 1):
            tags[i] = TAG_INDEX[f"I-{span.entity_type}"]
    return tags


def bio_to_spans(tags: Sequence[int], tokens: Sequence[Token] | None = None) -> list[EntitySpan]:
    """Recover spans from any tag sequence; an orphan I-X opens a new X span."""
    spans = []
    cur_type, cur_start = None, None

    def close(end):
        cs = ce = None
        if tokens is not None:
            cs, ce = tokens[cur_start].start, tokens[end].end
        spans.append(EntitySpan(cur_type, cur_start, end, cs, ce))

    for i, t in enumerate(tags):
        prefix, typ = _split_tag(TAGS[t])
        if prefix == "I" and typ == cur_type:
            continue
        if cur_type is not None:
            close(i - 1)
        cur_type, cur_start = (typ, i) if prefix != "O" else (None, None)
    if cur_type is not None:
        close(len(tags) - 1)
    return spans


def tokens_from_words(words: Sequence[str]) -> list[Token]:
    """Synthesize offsets for pre-tokenized words joined by single spaces."""
    out, pos = [], 0
    for w in words:
        out.append(Token(w, pos, pos + len(w)))
        pos += len(w) + 1
    return out


def load_bio_file(path, strict: bool = True) -> list[AnnotatedSentence]:
    """Read a token-per-line BIO file.

    With ``strict`` every sentence must be BIO-valid (model output read back
    for scoring is loaded with ``strict=False``).
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such corpus file: {path}")
    sentences: list[AnnotatedSentence] = []
    words: list[str] = []
    tags: list[int] = []
    doc_id = None
    first_line = 0

    def flush():
        if not words:
            return
        if strict:
            bad = bio_violation(tags)
            if bad is not None:
                raise DataError(f"{path}:{first_line + bad}: tag {TAGS[tags[bad]]} breaks the BIO scheme")
        sentences.append(AnnotatedSentence(tokens_from_words(words), list(tags), doc_id))
        words.clear()
        tags.clear()

    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                flush()
                continue
            if line.startswith("# "):
                continue
            if line.startswith("-DOCSTART-"):
                if words:
                    raise DataError(f"{path}:{lineno}: -DOCSTART- inside a sentence")
                doc_id = line[len("-DOCSTART-"):].strip() or None
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or any(c.isspace() for c in parts[0]):
                raise DataError(f"{path}:{lineno}: malformed line {line!r} (expected token<TAB>tag)")
            if not words:
                first_line = lineno
            try:
                tags.append(tag_index(parts[1].strip()))
            except DataError as e:
                raise DataError(f"{path}:{lineno}: {e}") from None
            words.append(parts[0])
        flush()
    return sentences


def format_bio(sentences: Iterable[AnnotatedSentence]) -> str:
    lines = []
    prev_doc = None
    for sent in sentences:
        if sent.doc_id is not None and sent.doc_id != prev_doc:
            lines.append(f"-DOCSTART- {sent.doc_id}")
        prev_doc = sent.doc_id
        for tok, tag in zip(sent.tokens, sent.tags):
            lines.append(f"{tok.text}\t{TAGS[tag]}")
        lines.append("")
    return "".join(line + "\n" for line in lines)


def write_bio_file(sentences: Iterable[AnnotatedSentence], path) -> None:
    Path(path).write_text(format_bio(sentences), encoding="utf-8", newline="")


# -- offset-style annotations ------------------------------------------------


@dataclass(frozen=True)
class OffsetSpan:
    doc_id: str
    char_start: int
    char_end: int
    entity_type: str
    surface: str = ""


@dataclass
class AlignmentReport:
    total: int = 0
    aligned: int = 0
    misaligned: list[tuple[OffsetSpan, str]] = field(default_factory=list)

    def format(self) -> str:
        lines = [f"spans: {self.total}", f"aligned: {self.aligned}", f"misaligned: {len(self.misaligned)}"]
        for span, reason in self.misaligned:
            lines.append(
                f"{span.doc_id}\t{span.char_start}\t{span.char_end}\t{span.entity_type}\t{span.surface}\t{reason}"
            )
        return "\n".join(lines) + "\n"


def read_offset_annotations(path) -> list[OffsetSpan]:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such annotation file: {path}")
    spans = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) not in (4, 5):
                raise DataError(f"{path}:{lineno}: expected doc_id, start, end, type[, surface]")
            try:
                start, end = int(parts[1]), int(parts[2])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-integer offsets") from None
            if parts[3] not in ENTITY_TYPES:
                raise DataError(f"{path}:{lineno}: unknown entity type {parts[3]}")
            if not 0 <= start < end:
                raise DataError(f"{path}:{lineno}: bad offsets [{start}, {end})")
            spans.append(OffsetSpan(parts[0], start, end, parts[3], parts[4] if len(parts) == 5 else ""))
    return spans


def read_text_file(path) -> list[tuple[str, str]]:
    """Read ``doc_id<TAB>sentence`` lines."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such text file: {path}")
    docs, seen = [], set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            doc_id, sep, text = line.partition("\t")
            if not sep:
                raise DataError(f"{path}:{lineno}: expected doc_id<TAB>text")
            if doc_id in seen:
                raise DataError(f"{path}:{lineno}: duplicate doc_id {doc_id}")
            seen.add(doc_id)
            docs.append((doc_id, text))
    return docs


def align_spans(
    text: str,
    spans: Sequence[OffsetSpan],
    doc_id: str | None = None,
    config: TokenizerConfig = DEFAULT_CONFIG,
    report: AlignmentReport | None = None,
) -> AnnotatedSentence:
    """Tokenize ``text`` and turn character spans into BIO tags.

    Spans whose edges do not fall on token edges, that overlap an earlier span,
    or that are multi-token for a single-token type are left untagged and
    recorded in ``report``.
    """
    report = report if report is not None else AlignmentReport()
    tokens = tokenize(text, config)
    by_start = {t.start: i for i, t in enumerate(tokens)}
    by_end = {t.end: i for i, t in enumerate(tokens)}
    taken = [False] * len(tokens)
    entity_spans = []
    for span in sorted(spans, key=lambda s: (s.char_start, s.char_end)):
        report.total += 1
        if span.char_end > len(text):
            raise DataError(f"{span.doc_id}: span [{span.char_start}, {span.char_end}) beyond text length {len(text)}")
        if span.surface and text[span.char_start:span.char_end] != span.surface:
            raise DataError(
                f"{span.doc_id}: surface {span.surface!r} does not match text "
                f"{text[span.char_start:span.char_end]!r} at [{span.char_start}, {span.char_end})"
            )
        i, j = by_start.get(span.char_start), by_end.get(span.char_end)
        if i is None or j is None or i > j:
            report.misaligned.append((span, "boundary inside a token"))
            continue
        if any(taken[i:j + 1]):
            report.misaligned.append((span, "overlaps another span"))
            continue
        if span.entity_type in SINGLE_TOKEN_TYPES and i != j:
            report.misaligned.append((span, f"multi-token {span.entity_type}"))
            continue
        taken[i:j + 1] = [True] * (j - i + 1)
        entity_spans.append(EntitySpan(span.entity_type, i, j, span.char_start, span.char_end))
        report.aligned += 1
    return AnnotatedSentence(tokens, spans_to_bio(tokens, entity_spans), doc_id)


def load_offset_annotations(
    text_path, spans: Sequence[OffsetSpan], config: TokenizerConfig = DEFAULT_CONFIG
) -> tuple[list[AnnotatedSentence], AlignmentReport]:
    docs = read_text_file(text_path)
    known = {d for d, _ in docs}
    by_doc: dict[str, list[OffsetSpan]] = {}
    for s in spans:
        if s.doc_id not in known:
            raise DataError(f"annotation refers to unknown doc_id {s.doc_id}")
        by_doc.setdefault(s.doc_id, []).append(s)
    report = AlignmentReport()
    sentences = [align_spans(text, by_doc.get(doc_id, []), doc_id, config, report) for doc_id, text in docs]
    if report.misaligned:
        logger.warning("%d of %d spans could not be aligned to token boundaries", len(report.misaligned), report.total)
    return sentences, report


def split_holdout(sentences: Sequence[AnnotatedSentence], fraction: float = 0.2, seed: int = 0, rng=None):
    """Random holdout; both parts keep the original sentence order."""
    if not 0 < fraction < 1:
        raise ValueError(f"holdout fraction must be in (0, 1), got {fraction}")
    if not sentences:
        raise DataError("cannot split an empty corpus")
    n = len(sentences)
    n_val = int(round(fraction * n))
    gen = rng if rng is not None else np.random.default_rng(seed)
    perm = gen.permutation(n)
    val_idx = set(perm[:n_val].tolist())
    train = [s for i, s in enumerate(sentences) if i not in val_idx]
    val = [s for i, s in enumerate(sentences) if i in val_idx]
    return train, val


def split_long_sentence(sentence: AnnotatedSentence, max_len: int) -> list[AnnotatedSentence]:
    """Cut a sentence into pieces of at most ``max_len`` tokens, never inside an entity if avoidable."""
    out = []
    toks, tags = list(sentence.tokens), list(sentence.tags)
    while len(toks) > max_len:
        cut = max_len
        while cut > 0 and _split_tag(TAGS[tags[cut]])[0] == "I":
            cut -= 1
        if cut == 0:
            cut = max_len
        out.append(AnnotatedSentence(toks[:cut], tags[:cut], sentence.doc_id))
        toks, tags = toks[cut:], tags[cut:]
    out.append(AnnotatedSentence(toks, tags, sentence.doc_id))
    return out
