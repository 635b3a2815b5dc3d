"""Declarative run configuration (YAML or JSON) with strict key checking.

Relative paths are resolved against the directory of the config file.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from .errors import ConfigError
from .network import ModelConfig
from .optim import OptimizerConfig
from .tokenizer import TokenizerConfig
from .training import TrainConfig


@dataclass
class DataConfig:
    train: str | None = None
    validation: str | None = None  # when absent, a holdout of train is used
    test: str | None = None
    holdout_fraction: float = 0.2


@dataclass
class EmbeddingConfig:
    path: str | None = None
    random_init: bool = True  # allow random vectors when no file is usable
    dim: int = 50
    scale: float = 0.1
    files: dict = field(default_factory=dict)  # named vector files for the grid's word_emb axis


@dataclass
class GridConfig:
    axes: dict = field(default_factory=dict)
    budget: int = 1


@dataclass
class RunConfig:
    seed: int = 0
    data: DataConfig = field(default_factory=DataConfig)
    embeddings: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    tokenizer: TokenizerConfig = field(default_factory=TokenizerConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    grid: GridConfig = field(default_factory=GridConfig)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "data": asdict(self.data),
            "embeddings": asdict(self.embeddings),
            "tokenizer": self.tokenizer.to_dict(),
            "model": self.model.to_dict(),
            "train": self.train.to_dict(),
            "optimizer": self.optimizer.to_dict(),
            "grid": asdict(self.grid),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _plain(cls, d, section: str):
    if d is None:
        return cls()
    if not isinstance(d, dict):
        raise ConfigError(f"section '{section}' must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(d) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in '{section}': {', '.join(unknown)}")
    try:
        return cls(**d)
    except TypeError as e:
        raise ConfigError(f"section '{section}': {e}") from None


def _tokenizer(d) -> TokenizerConfig:
    if d is None:
        return TokenizerConfig()
    unknown = sorted(set(d) - {"split_chars", "strip_chars", "bracket_pairs"})
    if unknown:
        raise ConfigError(f"unknown key(s) in 'tokenizer': {', '.join(unknown)}")
    try:
        return TokenizerConfig.from_dict(d)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"tokenizer: {e}") from None


def run_config_from_dict(d: dict, base_dir: Path | None = None) -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigError("config must be a mapping at top level")
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(d) - known)
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
    try:
        cfg = RunConfig(
            seed=int(d.get("seed", 0)),
            data=_plain(DataConfig, d.get("data"), "data"),
            embeddings=_plain(EmbeddingConfig, d.get("embeddings"), "embeddings"),
            tokenizer=_tokenizer(d.get("tokenizer")),
            model=ModelConfig.from_dict(d.get("model") or {}),
            train=TrainConfig.from_dict(d.get("train") or {}),
            optimizer=OptimizerConfig.from_dict(d.get("optimizer") or {}),
            grid=_plain(GridConfig, d.get("grid"), "grid"),
        )
    except TypeError as e:
        raise ConfigError(str(e)) from None
    if base_dir is not None:
        _resolve_paths(cfg, Path(base_dir))
    return cfg


def _resolve_paths(cfg: RunConfig, base: Path):
    def fix(p):
        if p is None:
            return None
        path = Path(p)
        return str(path if path.is_absolute() else (base / path))

    for name in ("train", "validation", "test"):
        setattr(cfg.data, name, fix(getattr(cfg.data, name)))
    cfg.embeddings.path = fix(cfg.embeddings.path)
    cfg.embeddings.files = {k: fix(v) for k, v in cfg.embeddings.files.items()}


def load_run_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"no such config file: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: cannot parse config ({e})") from None
    return run_config_from_dict(data or {}, path.parent)
