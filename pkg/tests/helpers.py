"""Small model and corpus builders shared by tests."""

import numpy as np

from deepvar.embeddings import random_table
from deepvar.network import DeepVar, ModelConfig
from deepvar.numerics import Rng

TINY = dict(word_dim=4, word_lstm_states=3, hidden_states=5, cnn_filters=4, cnn_window=3, max_char_length=6,
            char_lstm_states=2)


def tiny_model(seed=0, words=("we", "found", "c.1A>G", "in", "rs12"), **overrides):
    cfg = ModelConfig(**{**TINY, **overrides})
    table = random_table(list(words), cfg.word_dim, np.random.default_rng(seed), scale=0.5)
    return DeepVar.from_table(cfg, table, Rng(seed).child("init"))


def write_synthetic_project(root, n_train=24, n_test=8, epochs=2, extra=""):
    """Train/test BIO files plus a small YAML config under ``root``; returns the config path."""
    from deepvar.corpus import write_bio_file
    from deepvar.synthetic import generate_corpus

    write_bio_file(generate_corpus(n_train, seed=1, prefix="tr"), root / "train.bio")
    write_bio_file(generate_corpus(n_test, seed=2, prefix="te"), root / "test.bio")
    cfg = root / "run.yaml"
    cfg.write_text(
        "seed: 5\n"
        "data: {train: train.bio, test: test.bio}\n"
        "embeddings: {dim: 8}\n"
        "model: {word_lstm_states: 4, hidden_states: 6, cnn_filters: 5, max_char_length: 12}\n"
        f"train: {{batch_size: 8, max_epochs: {epochs}}}\n"
        "optimizer: {kind: ADAM, learning_rate: 0.01}\n" + extra
    )
    return cfg
