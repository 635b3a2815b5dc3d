"""Grid and random-subsample search over the hyperparameter table."""

from __future__ import annotations

import copy
import json
import logging
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .config import RunConfig, run_config_from_dict
from .errors import ConfigError

logger = logging.getLogger(__name__)

# axis -> (config section, field, allowed values); None means "checked elsewhere"
AXES = {
    "max_char_length": ("model", "max_char_length", (15, 30, 50)),
    "char_emb_size": ("model", "char_emb_size", (25, 50, 100)),
    "char_emb_dropout": ("model", "char_emb_dropout", (0, 0.25, 0.5)),
    "cnn_filters": ("model", "cnn_filters", (30, 50, 70)),
    "cnn_window": ("model", "cnn_window", (3, 5, 7)),
    "char_lstm_states": ("model", "char_lstm_states", (25, 50, 100)),
    "char_dropout": ("model", "char_dropout", (0, 0.25, 0.5)),
    "char_encoder": ("model", "char_encoder", ("cnn", "bilstm")),
    "word_emb": ("embeddings", "path", None),
    "word_emb_dim": ("embeddings", "dim", (50, 100)),
    "units": ("model", "units", (1, 2)),
    "word_lstm_states": ("model", "word_lstm_states", (50, 100, 200)),
    "word_lstm_dropout": ("model", "word_lstm_dropout", (0, 0.25, 0.5)),
    "hidden_states": ("model", "hidden_states", (50, 100, 200)),
    "hidden_dropout": ("model", "hidden_dropout", (0, 0.25, 0.5)),
    "batch_size": ("train", "batch_size", (32, 64, 128)),
    "optimizer": ("optimizer", "kind", ("SGD", "RMSP", "ADAM")),
}


@dataclass
class GridSpec:
    axes: dict  # axis name -> list of values, enumerated in AXES order

    def __post_init__(self):
        self.axes = {k: list(self.axes[k]) for k in AXES if k in self.axes}

    @classmethod
    def full_table(cls) -> "GridSpec":
        return cls({k: list(v) for k, (_, _, v) in AXES.items() if v is not None})

    @classmethod
    def from_config(cls, axes: dict, embedding_files: dict | None = None) -> "GridSpec":
        spec = cls(dict(axes))
        spec.validate(axes, embedding_files or {})
        return spec

    def validate(self, raw_axes: dict, embedding_files: dict):
        for name, values in raw_axes.items():
            if name not in AXES:
                raise ConfigError(f"grid axis '{name}' is not a known axis")
            if not isinstance(values, (list, tuple)) or not values:
                raise ConfigError(f"grid axis '{name}' needs a non-empty list of values")
            allowed = AXES[name][2]
            if allowed is None:
                allowed = tuple(embedding_files)
            for v in values:
                if v not in allowed or isinstance(v, bool):
                    raise ConfigError(f"grid axis '{name}': value {v!r} not in {list(allowed)}")

    @property
    def size(self) -> int:
        return math.prod(len(v) for v in self.axes.values())

    def point(self, index: int) -> dict:
        """Axis values of the ``index``-th point in enumeration order (last axis fastest)."""
        if not 0 <= index < self.size:
            raise IndexError(index)
        out = {}
        for name in reversed(list(self.axes)):
            vals = self.axes[name]
            index, r = divmod(index, len(vals))
            out[name] = vals[r]
        return {k: out[k] for k in self.axes}

    def select(self, budget: int, seed: int = 0) -> list[int]:
        """All indices, or a seeded sample of ``budget`` of them kept in enumeration order."""
        if budget < 1:
            raise ConfigError(f"grid budget must be >= 1, got {budget}")
        if budget >= self.size:
            return list(range(self.size))
        return sorted(random.Random(seed).sample(range(self.size), budget))


def apply_point(base: RunConfig, point: dict) -> RunConfig:
    d = copy.deepcopy(base.to_dict())
    for name, value in point.items():
        section, key, _ = AXES[name]
        if name == "word_emb":
            value = base.embeddings.files[value]
        d[section][key] = value
    return run_config_from_dict(d)


@dataclass
class TrialResult:
    index: int
    point: dict
    validation_f1: float | None
    directory: str


def _run_trial(args) -> TrialResult:
    from .pipeline import run

    index, point, cfg_dict, directory = args
    cfg = run_config_from_dict(cfg_dict)
    _, report = run(cfg, directory)
    (Path(directory) / "point.json").write_text(json.dumps(point, sort_keys=True) + "\n")
    return TrialResult(index, point, report.best_validation_f1, directory)


def grid_search(base: RunConfig, spec: GridSpec, budget: int, out_dir, jobs: int = 1,
                resume: bool = False) -> list[TrialResult]:
    """Run the selected trials and rank them by validation macro F1 (ties: enumeration order)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    todo, done = [], []
    for index in spec.select(budget, base.seed):
        point = spec.point(index)
        directory = out / f"trial-{index:06d}"
        summary = directory / "summary.json"
        if resume and summary.is_file() and (directory / "point.json").is_file():
            f1 = json.loads(summary.read_text())["best_validation_f1"]
            done.append(TrialResult(index, point, f1, str(directory)))
            logger.info("trial %d already finished, skipping", index)
            continue
        todo.append((index, point, apply_point(base, point).to_dict(), str(directory)))
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done += list(pool.map(_run_trial, todo))
    else:
        done += [_run_trial(t) for t in todo]
    ranked = sorted(done, key=lambda r: (-(r.validation_f1 if r.validation_f1 is not None else -1.0), r.index))
    lines = ["rank\ttrial\tvalidation_f1\tpoint"]
    for rank, r in enumerate(ranked, start=1):
        lines.append(f"{rank}\t{r.index}\t{r.validation_f1}\t{json.dumps(r.point, sort_keys=True)}")
    (out / "ranking.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return ranked
