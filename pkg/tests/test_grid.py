import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from deepvar.config import load_run_config
from deepvar.errors import ConfigError
from deepvar.grid import AXES, GridSpec, apply_point, grid_search
from helpers import write_synthetic_project


def test_full_table_size():
    spec = GridSpec.full_table()
    assert "word_emb" not in spec.axes
    assert spec.size == 3 ** 13 * 2 ** 3


def test_enumeration_is_mixed_radix_last_axis_fastest():
    spec = GridSpec({"units": [1, 2], "batch_size": [32, 64, 128]})
    points = [spec.point(i) for i in range(spec.size)]
    assert points[:4] == [{"units": 1, "batch_size": 32}, {"units": 1, "batch_size": 64},
                          {"units": 1, "batch_size": 128}, {"units": 2, "batch_size": 32}]
    with pytest.raises(IndexError):
        spec.point(6)


@given(st.integers(0, 3 ** 13 * 8 - 1))
def test_points_are_in_domain(index):
    for name, value in GridSpec.full_table().point(index).items():
        assert value in AXES[name][2]


def test_select_budget():
    spec = GridSpec.full_table()
    a = spec.select(5, seed=1)
    assert a == sorted(a) and len(set(a)) == 5
    assert a == spec.select(5, seed=1)
    assert GridSpec({"units": [1, 2]}).select(10) == [0, 1]
    with pytest.raises(ConfigError):
        spec.select(0)


@pytest.mark.parametrize("axes,needle", [({"units": [3]}, "units"), ({"depth": [1]}, "depth"),
                                         ({"optimizer": []}, "optimizer"), ({"word_emb": ["pm"]}, "word_emb")])
def test_invalid_axes_named(axes, needle):
    with pytest.raises(ConfigError, match=needle):
        GridSpec.from_config(axes, {})


def test_apply_point(tmp_path):
    cfg = load_run_config(write_synthetic_project(tmp_path))
    cfg.embeddings.files = {"pm": "/vectors/pm.txt"}
    new = apply_point(cfg, {"units": 2, "optimizer": "SGD", "batch_size": 64, "word_emb": "pm", "word_emb_dim": 100})
    assert (new.model.units, new.optimizer.kind, new.train.batch_size) == (2, "SGD", 64)
    assert (new.embeddings.path, new.embeddings.dim) == ("/vectors/pm.txt", 100)
    assert cfg.model.units == 1


def test_grid_runs_resumes_and_ranks(tmp_path):
    cfg = load_run_config(write_synthetic_project(tmp_path, n_train=10, n_test=4, epochs=1))
    spec = GridSpec({"units": [1, 2], "hidden_dropout": [0, 0.5]})
    ranked = grid_search(cfg, spec, 2, tmp_path / "g")
    dirs = sorted(p.name for p in (tmp_path / "g").iterdir() if p.is_dir())
    assert len(dirs) == 2 and all(d.startswith("trial-") for d in dirs)
    keys = [(-(r.validation_f1), r.index) for r in ranked]
    assert keys == sorted(keys)
    stamp = (tmp_path / "g" / dirs[0] / "summary.json").stat().st_mtime_ns
    again = grid_search(cfg, spec, 2, tmp_path / "g", resume=True)
    assert (tmp_path / "g" / dirs[0] / "summary.json").stat().st_mtime_ns == stamp
    assert [(r.index, r.validation_f1) for r in again] == [(r.index, r.validation_f1) for r in ranked]
    point = json.loads((tmp_path / "g" / dirs[0] / "point.json").read_text())
    assert set(point) == {"units", "hidden_dropout"}
    assert (tmp_path / "g" / "ranking.tsv").read_text().count("\n") == 3


def test_parallel_trials_match_serial(tmp_path):
    cfg = load_run_config(write_synthetic_project(tmp_path, n_train=10, n_test=4, epochs=1))
    spec = GridSpec({"units": [1, 2]})
    serial = grid_search(cfg, spec, 2, tmp_path / "s", jobs=1)
    parallel = grid_search(cfg, spec, 2, tmp_path / "p", jobs=2)
    assert [(r.index, r.validation_f1) for r in serial] == [(r.index, r.validation_f1) for r in parallel]
    for r in serial:
        name = f"trial-{r.index:06d}"
        assert (tmp_path / "s" / name / "model.ckpt").read_bytes() == (tmp_path / "p" / name / "model.ckpt").read_bytes()
