"""Versioned binary checkpoint container.

Layout (all integers little-endian)::

    bytes 0..7    magic  b"DEEPVAR\\x00"
    bytes 8..11   uint32 format version (currently 1)
    bytes 12..15  uint32 manifest length M
    next M bytes  manifest, UTF-8 JSON with sorted keys
    then, for each entry of manifest["sections"] in order:
        uint64 payload length L
        L bytes payload

A ``tensor`` section holds float64 little-endian values in C order with the
manifest's ``shape``; a ``text`` section holds UTF-8 text (the vocabulary, one
word per line). Every section records ``nbytes`` and a ``sha256`` of its
payload. The manifest also carries the model config, tokenizer config, tag
list and character alphabet. No bytes may follow the last section.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .corpus import TAGS
from .embeddings import DEFAULT_ALPHABET
from .errors import DataError
from .network import DeepVar, ModelConfig
from .tokenizer import DEFAULT_CONFIG, TokenizerConfig

MAGIC = b"DEEPVAR\x00"
VERSION = 1


class CheckpointError(DataError):
    pass


def _sha(b: bytes) -> str:
    return hashlib.sha256(b).hexdigest()


def dumps(model: DeepVar, tokenizer: TokenizerConfig = DEFAULT_CONFIG, extra: dict | None = None) -> bytes:
    payloads, sections = [], []
    vocab = "\n".join(model.vocab).encode("utf-8")
    payloads.append(vocab)
    sections.append({"name": "vocab", "kind": "text", "count": len(model.vocab),
                     "nbytes": len(vocab), "sha256": _sha(vocab)})
    for name, p in model.params.items():
        raw = np.ascontiguousarray(p.data, dtype="<f8").tobytes()
        payloads.append(raw)
        sections.append({"name": name, "kind": "tensor", "dtype": "<f8", "shape": list(p.shape),
                         "trainable": p.trainable, "nbytes": len(raw), "sha256": _sha(raw)})
    manifest = {
        "format": "deepvar-checkpoint",
        "version": VERSION,
        "model_config": model.config.to_dict(),
        "tokenizer": tokenizer.to_dict(),
        "tags": list(TAGS),
        "alphabet": list(model.alphabet.symbols),
        "sections": sections,
        "extra": extra or {},
    }
    head = json.dumps(manifest, sort_keys=True, ensure_ascii=False).encode("utf-8")
    out = [MAGIC, struct.pack("<II", VERSION, len(head)), head]
    for raw in payloads:
        out.append(struct.pack("<Q", len(raw)))
        out.append(raw)
    return b"".join(out)


def save(model: DeepVar, path, tokenizer: TokenizerConfig = DEFAULT_CONFIG, extra: dict | None = None) -> None:
    Path(path).write_bytes(dumps(model, tokenizer, extra))


def read_manifest(blob: bytes, source="checkpoint") -> tuple[dict, int]:
    if len(blob) < 16 or blob[:8] != MAGIC:
        raise CheckpointError(f"{source}: not a DeepVar checkpoint (bad magic)")
    version, mlen = struct.unpack("<II", blob[8:16])
    if version != VERSION:
        raise CheckpointError(f"{source}: unsupported format version {version}")
    if 16 + mlen > len(blob):
        raise CheckpointError(f"{source}: manifest truncated ({mlen} bytes declared)")
    try:
        manifest = json.loads(blob[16:16 + mlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{source}: manifest is not valid JSON ({e})") from None
    return manifest, 16 + mlen


def loads(blob: bytes, source="checkpoint") -> tuple[DeepVar, dict]:
    manifest, pos = read_manifest(blob, source)
    try:
        sections = manifest["sections"]
        config = ModelConfig.from_dict(manifest["model_config"])
        tags, alphabet = manifest["tags"], manifest["alphabet"]
    except (KeyError, TypeError) as e:
        raise CheckpointError(f"{source}: manifest missing field {e}") from None
    if tuple(tags) != TAGS:
        raise CheckpointError(f"{source}: manifest tag set {tags} differs from {list(TAGS)}")
    if tuple(alphabet) != DEFAULT_ALPHABET.symbols:
        raise CheckpointError(f"{source}: manifest alphabet differs from the built-in 70-symbol alphabet")

    payloads = {}
    for sec in sections:
        if pos + 8 > len(blob):
            raise CheckpointError(f"{source}: section {sec.get('name')!r} truncated (no length prefix)")
        (n,) = struct.unpack("<Q", blob[pos:pos + 8])
        pos += 8
        raw = blob[pos:pos + n]
        pos += n
        if len(raw) != n or n != sec.get("nbytes"):
            raise CheckpointError(f"{source}: section {sec.get('name')!r} has {len(raw)} bytes, "
                                  f"manifest says {sec.get('nbytes')}")
        if _sha(raw) != sec.get("sha256"):
            raise CheckpointError(f"{source}: section {sec.get('name')!r} fails its sha256 check")
        payloads[sec["name"]] = (sec, raw)
    if pos != len(blob):
        raise CheckpointError(f"{source}: {len(blob) - pos} unexpected trailing bytes")

    if "vocab" not in payloads:
        raise CheckpointError(f"{source}: no vocab section")
    text = payloads.pop("vocab")[1].decode("utf-8")
    vocab = text.split("\n") if text else []
    state = {}
    for name, (sec, raw) in payloads.items():
        arr = np.frombuffer(raw, dtype="<f8")
        shape = tuple(sec["shape"])
        if arr.size != int(np.prod(shape)):
            raise CheckpointError(f"{source}: tensor {name!r} size does not match shape {shape}")
        state[name] = arr.reshape(shape).astype(np.float64)
    if "word.embedding" not in state:
        raise CheckpointError(f"{source}: no word.embedding tensor")
    model = DeepVar(config, vocab, state["word.embedding"])
    try:
        model.load_state_dict(state)
    except ValueError as e:
        raise CheckpointError(f"{source}: {e}") from None
    return model, manifest


def load(path) -> tuple[DeepVar, dict]:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such checkpoint: {path}")
    return loads(path.read_bytes(), str(path))


def load_tokenizer(manifest: dict) -> TokenizerConfig:
    return TokenizerConfig.from_dict(manifest.get("tokenizer", {}))
