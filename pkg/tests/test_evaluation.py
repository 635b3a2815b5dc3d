import pytest
from hypothesis import given
from hypothesis import strategies as st

from deepvar.corpus import TAG_INDEX, TAGS, bio_to_spans
from deepvar.evaluation import EvalReport, exact_match_score, score_tag_output
from golden import EVAL_FIXTURES


def indices(sents):
    return [[TAG_INDEX[t] for t in s] for s in sents]


@pytest.mark.parametrize("name,gold,pred,counts,macro", EVAL_FIXTURES, ids=[f[0] for f in EVAL_FIXTURES])
def test_fixture_counts(name, gold, pred, counts, macro):
    report = score_tag_output(indices(gold), indices(pred))
    got = {t: (s.tp, s.fp, s.fn) for t, s in report.per_type.items() if s.present}
    assert got == counts
    assert report.macro_f1 == pytest.approx(macro, abs=1e-12)


def test_macro_ignores_absent_types_and_micro_pools():
    report = exact_match_score([[("SNP", 0, 0), ("DNAMutation", 2, 3)]], [[("SNP", 0, 0)]])
    assert report.scored_types == ["DNAMutation", "SNP"]
    assert report.macro_f1 == 0.5
    assert (report.micro.tp, report.micro.fp, report.micro.fn) == (1, 0, 1)
    assert report.micro.f1 == pytest.approx(2 / 3)


def test_duplicate_predictions_count_once():
    report = exact_match_score([[("SNP", 0, 0)]], [[("SNP", 0, 0), ("SNP", 0, 0)]])
    s = report.per_type["SNP"]
    assert (s.tp, s.fp, s.fn) == (1, 1, 0)


def test_length_mismatches_raise():
    with pytest.raises(ValueError, match="sentences"):
        score_tag_output([[0]], [])
    with pytest.raises(ValueError, match="sentence 0"):
        score_tag_output([[0, 0]], [[0]])


def test_serializations():
    report = score_tag_output(indices([["B-SNP"]]), indices([["B-SNP"]]))
    assert report.to_dict()["per_type"]["SNP"]["f1"] == 1.0
    table = report.format_table()
    assert table.splitlines()[0].split() == ["type", "TP", "FP", "FN", "P", "R", "F1"]
    assert "100.00" in table
    assert EvalReport().macro_f1 == 1.0


sents = st.lists(st.lists(st.sampled_from(range(len(TAGS))), max_size=8), max_size=5)


@given(sents)
def test_perfect_prediction_scores_one(gold):
    report = score_tag_output(gold, gold)
    assert report.macro_f1 == 1.0
    assert report.micro.fp == report.micro.fn == 0


@given(sents, st.data())
def test_counts_are_consistent(gold, data):
    pred = [data.draw(st.lists(st.sampled_from(range(len(TAGS))), min_size=len(g), max_size=len(g))) for g in gold]
    report = score_tag_output(gold, pred)
    m = report.micro
    assert m.tp + m.fn == sum(len(bio_to_spans(g)) for g in gold)
    assert m.tp + m.fp == sum(len(bio_to_spans(p)) for p in pred)
    assert 0.0 <= report.macro_f1 <= 1.0
