"""Mini-batch CRF training with clipping, decay and early stopping on validation macro F1."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from . import numerics as nx
from .corpus import AnnotatedSentence, DatasetSplit, split_long_sentence
from .errors import ConfigError, DataError, NumericError
from .evaluation import EvalReport, score_tag_output
from .network import DeepVar
from .numerics import Rng
from .optim import Optimizer, OptimizerConfig, effective_lr, optimizer_step  # noqa: F401

logger = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    batch_size: int = 32
    max_epochs: int = 100
    patience: int | None = 10  # None disables early stopping
    target_f1: float | None = None  # stop once validation macro F1 reaches this
    eval_batch_size: int = 64

    def __post_init__(self):
        if not isinstance(self.batch_size, int) or self.batch_size < 1:
            raise ConfigError(f"train.batch_size must be >= 1, got {self.batch_size!r}")
        if not isinstance(self.max_epochs, int) or self.max_epochs < 0:
            raise ConfigError(f"train.max_epochs must be >= 0, got {self.max_epochs!r}")
        if self.patience is not None and self.patience < 1:
            raise ConfigError(f"train.patience must be >= 1 or null, got {self.patience!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        unknown = sorted(set(d) - {f.name for f in fields(cls)})
        if unknown:
            raise ConfigError(f"unknown train config key(s): {', '.join(unknown)}")
        return cls(**d)


@dataclass
class Batch:
    words: list[list[str]]
    tags: np.ndarray  # (B, N), padding tagged O
    mask: np.ndarray  # (B, N) bool
    indices: list[int]

    def __len__(self):
        return len(self.words)


def make_batches(sentences: Sequence[AnnotatedSentence], batch_size: int, rng: Rng | None = None,
                 max_len: int | None = None) -> list[Batch]:
    """Shuffle (when ``rng`` is given) and cut into padded batches with masks."""
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    n = len(sentences)
    order = rng.generator.permutation(n).tolist() if rng is not None else list(range(n))
    batches = []
    for k in range(0, n, batch_size):
        idx = order[k:k + batch_size]
        sents = [sentences[i] for i in idx]
        width = max(len(s) for s in sents)
        if max_len is not None and width > max_len:
            raise ValueError(f"sentence of {width} tokens exceeds {max_len}; split it first")
        tags = np.zeros((len(sents), width), dtype=np.int64)
        mask = np.zeros((len(sents), width), dtype=bool)
        for b, s in enumerate(sents):
            tags[b, :len(s)] = s.tags
            mask[b, :len(s)] = True
        batches.append(Batch([s.words for s in sents], tags, mask, idx))
    return batches


def split_long_sentences(sentences: Sequence[AnnotatedSentence], max_len: int, label: str = ""):
    out, notes = [], []
    for i, s in enumerate(sentences):
        if len(s) == 0:
            continue
        if len(s) > max_len:
            pieces = split_long_sentence(s, max_len)
            notes.append({"set": label, "index": i, "tokens": len(s), "pieces": [len(p) for p in pieces]})
            out.extend(pieces)
        else:
            out.append(s)
    return out, notes


# -- report ---------------------------------------------------------------------------


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    learning_rate: float
    grad_norm: float
    validation: dict
    improved: bool


@dataclass
class TrainReport:
    config: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    sizes: dict = field(default_factory=dict)
    split_sentences: list = field(default_factory=list)
    epochs: list[EpochRecord] = field(default_factory=list)
    best_epoch: int | None = None
    best_validation_f1: float | None = None
    stop_reason: str = ""
    test: dict | None = None
    wall_clock_seconds: float | None = None  # kept out of the serialized report

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("wall_clock_seconds")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainReport":
        d = dict(d)
        d["epochs"] = [EpochRecord(**e) for e in d.get("epochs", [])]
        return cls(**d)

    def jsonl(self) -> str:
        lines = [{"event": "start", "config": self.config, "seeds": self.seeds, "sizes": self.sizes,
                  "split_sentences": self.split_sentences}]
        lines += [{"event": "epoch", **asdict(e)} for e in self.epochs]
        lines.append({"event": "end", "best_epoch": self.best_epoch, "best_validation_f1": self.best_validation_f1,
                      "stop_reason": self.stop_reason, "test": self.test})
        return "".join(json.dumps(x, sort_keys=True) + "\n" for x in lines)

    def summary_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.jsonl").write_text(self.jsonl(), encoding="utf-8")
        (out / "summary.json").write_text(self.summary_json(), encoding="utf-8")
        if self.wall_clock_seconds is not None:
            (out / "timing.json").write_text(json.dumps({"wall_clock_seconds": self.wall_clock_seconds}) + "\n")

    @classmethod
    def load(cls, out_dir) -> "TrainReport":
        path = Path(out_dir) / "summary.json"
        if not path.is_file():
            raise DataError(f"no report at {path}")
        report = cls.from_dict(json.loads(path.read_text(encoding="utf-8")))
        timing = Path(out_dir) / "timing.json"
        if timing.is_file():
            report.wall_clock_seconds = json.loads(timing.read_text())["wall_clock_seconds"]
        return report


def report_summary(rep: EvalReport) -> dict:
    micro = rep.micro
    return {
        "macro_f1": rep.macro_f1,
        "macro_precision": rep.macro_precision,
        "macro_recall": rep.macro_recall,
        "micro_f1": micro.f1,
        "per_type_f1": {t: s.f1 for t, s in rep.per_type.items()},
        "counts": {t: [s.tp, s.fp, s.fn] for t, s in rep.per_type.items()},
    }


def evaluate(model: DeepVar, sentences: Sequence[AnnotatedSentence], batch_size: int = 64) -> EvalReport:
    pred = model.predict([s.words for s in sentences], batch_size)
    return score_tag_output([s.tags for s in sentences], pred)


# -- training loop ------------------------------------------------------------------------


def train(model: DeepVar, split: DatasetSplit, train_config: TrainConfig, optimizer_config: OptimizerConfig,
          rng: Rng | None = None, report: TrainReport | None = None) -> tuple[DeepVar, TrainReport]:
    """Fit ``model`` in place; the best-validation parameters are restored at the end."""
    started = time.perf_counter()
    rng = rng if rng is not None else Rng(0)
    report = report if report is not None else TrainReport()
    limit = model.config.max_word_length
    train_set, notes = split_long_sentences(split.train, limit, "train")
    val_set, notes_v = split_long_sentences(split.validation, limit, "validation")
    report.split_sentences = notes + notes_v
    if not train_set:
        raise DataError("training set is empty")
    report.sizes = {"train": len(split.train), "validation": len(split.validation), "test": len(split.test)}
    report.seeds.setdefault("seed", rng.seed)

    shuffle_rng, dropout_rng = rng.child("shuffle"), rng.child("dropout")
    params = model.trainable_parameters()
    opt = Optimizer(optimizer_config, params)
    best_f1, best_state, stale = -1.0, None, 0
    report.stop_reason = "max_epochs"

    for epoch in range(1, train_config.max_epochs + 1):
        total, count, norms = 0.0, 0, []
        for batch in make_batches(train_set, train_config.batch_size, shuffle_rng, limit):
            model.zero_grad()
            loss, _ = model.batch_loss(batch.words, batch.tags, training=True, rng=dropout_rng)
            value = loss.item()
            if not np.isfinite(value):
                report.stop_reason = f"diverged: non-finite loss at epoch {epoch}"
                raise NumericError(report.stop_reason, report)
            nx.backward(loss)
            grads = [p.grad for p in params]
            bad = [p.name for p, g in zip(params, grads) if not np.all(np.isfinite(g))]
            if bad:
                report.stop_reason = f"non-finite gradient in {bad[0]} at epoch {epoch}"
                raise NumericError(report.stop_reason, report)
            clipped, norm = nx.clip_global_norm(grads, optimizer_config.clipnorm)
            opt.step(clipped)
            norms.append(norm)
            total += value * len(batch)
            count += len(batch)

        if val_set:
            val = report_summary(evaluate(model, val_set, train_config.eval_batch_size))
            f1 = val["macro_f1"]
        else:
            val, f1 = {}, float(epoch)  # nothing to monitor: keep the latest parameters
        improved = f1 > best_f1
        if improved:
            best_f1, best_state, stale = f1, model.state_dict(), 0
            report.best_epoch = epoch
            report.best_validation_f1 = val.get("macro_f1")
        else:
            stale += 1
        report.epochs.append(EpochRecord(epoch, total / count, effective_lr(optimizer_config, opt.steps - 1),
                                         float(np.mean(norms)), val, improved))
        logger.info("epoch %d loss %.4f val macro F1 %s", epoch, total / count, val.get("macro_f1"))
        if train_config.target_f1 is not None and val and f1 >= train_config.target_f1:
            report.stop_reason = f"target_f1 reached at epoch {epoch}"
            break
        if train_config.patience is not None and stale >= train_config.patience:
            report.stop_reason = f"early stopping at epoch {epoch} (patience {train_config.patience})"
            break

    if best_state is not None:
        model.load_state_dict(best_state)
    if split.test:
        test_set, _ = split_long_sentences(split.test, limit, "test")
        report.test = report_summary(evaluate(model, test_set, train_config.eval_batch_size))
    report.wall_clock_seconds = time.perf_counter() - started
    return model, report
