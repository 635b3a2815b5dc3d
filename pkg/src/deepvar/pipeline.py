"""Turn a RunConfig into data, embeddings, a model and a finished training run."""

from __future__ import annotations

import dataclasses
import logging
from pathlib import Path

from . import checkpoint
from .config import RunConfig
from .corpus import DatasetSplit, load_bio_file, split_holdout
from .embeddings import EmbeddingTable, load_word_vectors, random_table
from .errors import ConfigError, DataError
from .network import DeepVar
from .numerics import Rng
from .training import TrainReport, train

logger = logging.getLogger(__name__)


def load_split(cfg: RunConfig, rng: Rng) -> DatasetSplit:
    if not cfg.data.train:
        raise ConfigError("data.train is required")
    train_set = load_bio_file(cfg.data.train)
    if not train_set:
        raise DataError(f"{cfg.data.train}: no sentences")
    if cfg.data.validation:
        val = load_bio_file(cfg.data.validation)
    else:
        train_set, val = split_holdout(train_set, cfg.data.holdout_fraction, rng=rng.child("holdout").generator)
    test = load_bio_file(cfg.data.test) if cfg.data.test else []
    return DatasetSplit(train_set, val, test)


def build_embeddings(cfg: RunConfig, split: DatasetSplit, rng: Rng) -> EmbeddingTable:
    emb = cfg.embeddings
    if emb.path and Path(emb.path).is_file():
        return load_word_vectors(emb.path)
    if not emb.random_init:
        if emb.path:
            raise DataError(f"embedding file not found: {emb.path} (random_init is disabled)")
        raise ConfigError("embeddings.path is not set and embeddings.random_init is disabled")
    if emb.path:
        logger.warning("embedding file %s not found; using random vectors", emb.path)
    words = [w for s in split.train for w in s.words]
    return random_table(words, emb.dim, rng.generator, emb.scale)


def build_model(cfg: RunConfig, table: EmbeddingTable, rng: Rng) -> DeepVar:
    model_cfg = dataclasses.replace(cfg.model, word_dim=table.dimension)
    cfg.model = model_cfg
    return DeepVar.from_table(model_cfg, table, rng)


def run(cfg: RunConfig, out_dir=None) -> tuple[DeepVar, TrainReport]:
    """Train from a config; with ``out_dir`` also write checkpoint, report and effective config."""
    root = Rng(cfg.seed)
    split = load_split(cfg, root.child("data"))
    table = build_embeddings(cfg, split, root.child("embeddings"))
    model = build_model(cfg, table, root.child("init"))
    report = TrainReport(config=cfg.to_dict(), seeds={"seed": cfg.seed})
    model, report = train(model, split, cfg.train, cfg.optimizer, root.child("train"), report)
    if out_dir is not None:
        write_outputs(model, report, cfg, out_dir)
    return model, report


def write_outputs(model: DeepVar, report: TrainReport, cfg: RunConfig, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(cfg.to_json(), encoding="utf-8")
    checkpoint.save(model, out / "model.ckpt", cfg.tokenizer, {"seed": cfg.seed})
    report.write(out)
