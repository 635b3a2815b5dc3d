import json

import numpy as np
import pytest

from deepvar.corpus import DatasetSplit
from deepvar.errors import ConfigError, NumericError
from deepvar.numerics import Rng
from deepvar.optim import OptimizerConfig
from deepvar.synthetic import generate_corpus
from deepvar.training import TrainConfig, TrainReport, evaluate, make_batches, split_long_sentences, train
from helpers import tiny_model


@pytest.fixture(scope="module")
def corpus():
    return generate_corpus(12, seed=3)


def model_for(sents, **kw):
    words = sorted({w for s in sents for w in s.words})
    return tiny_model(words=words, **kw)


def test_make_batches_pads_and_masks(corpus):
    batches = make_batches(corpus[:5], 2)
    assert [len(b) for b in batches] == [2, 2, 1]
    b = batches[0]
    assert b.tags.shape == b.mask.shape
    assert b.mask.sum() == len(corpus[0]) + len(corpus[1])
    assert not b.tags[~b.mask].any()


def test_make_batches_shuffle_is_seeded(corpus):
    a = [b.indices for b in make_batches(corpus, 4, Rng(1).child("s"))]
    b = [b.indices for b in make_batches(corpus, 4, Rng(1).child("s"))]
    assert a == b and sorted(sum(a, [])) == list(range(len(corpus)))


def test_split_long_sentences_records_notes(corpus):
    out, notes = split_long_sentences(corpus[:2], 5, "train")
    assert sum(len(s) for s in out) == len(corpus[0]) + len(corpus[1])
    assert all(len(s) <= 5 for s in out)
    assert notes and notes[0]["set"] == "train"


def test_train_config_validation():
    with pytest.raises(ConfigError, match="batch_size"):
        TrainConfig(batch_size=0)
    with pytest.raises(ConfigError, match="epochs"):
        TrainConfig.from_dict({"epochs": 3})


def fit(corpus, train_cfg, seed=0, **model_kw):
    model = model_for(corpus, **model_kw)
    split = DatasetSplit(corpus[:8], corpus[8:], corpus[8:])
    opt = OptimizerConfig(kind="ADAM", learning_rate=0.02, decay=0)
    return train(model, split, train_cfg, opt, Rng(seed))


def test_training_reduces_loss_and_restores_best(corpus):
    model, report = fit(corpus, TrainConfig(batch_size=4, max_epochs=6, patience=None))
    assert len(report.epochs) == 6
    assert report.epochs[-1].loss < report.epochs[0].loss
    assert report.stop_reason == "max_epochs"
    best = report.epochs[report.best_epoch - 1]
    assert best.improved and best.validation["macro_f1"] == report.best_validation_f1
    assert evaluate(model, corpus[8:]).macro_f1 == report.best_validation_f1
    assert report.test["macro_f1"] == report.best_validation_f1


def test_patience_stops_training(corpus):
    _, report = fit(corpus, TrainConfig(batch_size=4, max_epochs=50, patience=2))
    assert report.stop_reason.startswith("early stopping")
    assert [e.improved for e in report.epochs[-2:]] == [False, False]
    assert report.best_epoch == len(report.epochs) - 2


def test_target_f1_stops_training(corpus):
    _, report = fit(corpus, TrainConfig(batch_size=4, max_epochs=50, patience=None, target_f1=0.0))
    assert len(report.epochs) == 1
    assert report.stop_reason.startswith("target_f1")


def test_non_finite_loss_raises_with_report(corpus):
    model = model_for(corpus)
    model.output_W.data[:] = np.nan
    with pytest.raises(NumericError) as info:
        train(model, DatasetSplit(corpus[:4], corpus[4:6]), TrainConfig(max_epochs=2), OptimizerConfig(), Rng(0))
    assert "non-finite" in str(info.value)
    assert info.value.report.stop_reason == str(info.value)


def test_training_is_deterministic(corpus):
    cfg = TrainConfig(batch_size=4, max_epochs=2, patience=None)
    a_model, a = fit(corpus, cfg, word_lstm_dropout=0.25)
    b_model, b = fit(corpus, cfg, word_lstm_dropout=0.25)
    assert a.jsonl() == b.jsonl()
    for name, arr in a_model.state_dict().items():
        assert arr.tobytes() == b_model.params[name].data.tobytes()


def test_report_files_round_trip(tmp_path, corpus):
    _, report = fit(corpus, TrainConfig(batch_size=4, max_epochs=2, patience=None))
    report.write(tmp_path)
    lines = [json.loads(x) for x in (tmp_path / "report.jsonl").read_text().splitlines()]
    assert [x["event"] for x in lines] == ["start", "epoch", "epoch", "end"]
    assert "wall_clock_seconds" not in (tmp_path / "summary.json").read_text()
    again = TrainReport.load(tmp_path)
    assert again.summary_json() == report.summary_json()
    assert again.wall_clock_seconds == pytest.approx(report.wall_clock_seconds)
