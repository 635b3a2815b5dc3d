"""Exact-match entity scoring.

A predicted span counts only when a gold span in the same sentence has the
same boundaries and the same type; each gold span absorbs at most one
prediction. The headline is the macro F1 over entity types, where a type
absent from both gold and prediction is left out of the average.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .corpus import ENTITY_TYPES, bio_to_spans


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


@dataclass
class TypeScore:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return _prf(self.tp, self.fp, self.fn)[0]

    @property
    def recall(self) -> float:
        return _prf(self.tp, self.fp, self.fn)[1]

    @property
    def f1(self) -> float:
        return _prf(self.tp, self.fp, self.fn)[2]

    @property
    def present(self) -> bool:
        return self.tp + self.fp + self.fn > 0


@dataclass
class EvalReport:
    per_type: dict[str, TypeScore] = field(default_factory=lambda: {t: TypeScore() for t in ENTITY_TYPES})

    @property
    def scored_types(self) -> list[str]:
        return [t for t, s in self.per_type.items() if s.present]

    @property
    def macro_f1(self) -> float:
        types = self.scored_types
        if not types:
            return 1.0
        return sum(self.per_type[t].f1 for t in types) / len(types)

    @property
    def macro_precision(self) -> float:
        types = self.scored_types
        return sum(self.per_type[t].precision for t in types) / len(types) if types else 1.0

    @property
    def macro_recall(self) -> float:
        types = self.scored_types
        return sum(self.per_type[t].recall for t in types) / len(types) if types else 1.0

    @property
    def micro(self) -> TypeScore:
        return TypeScore(sum(s.tp for s in self.per_type.values()),
                         sum(s.fp for s in self.per_type.values()),
                         sum(s.fn for s in self.per_type.values()))

    def to_dict(self) -> dict:
        micro = self.micro
        return {
            "per_type": {
                t: {**asdict(s), "precision": s.precision, "recall": s.recall, "f1": s.f1}
                for t, s in self.per_type.items()
            },
            "macro": {"precision": self.macro_precision, "recall": self.macro_recall, "f1": self.macro_f1},
            "micro": {**asdict(micro), "precision": micro.precision, "recall": micro.recall, "f1": micro.f1},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def format_table(self) -> str:
        rows = [f"{'type':<16}{'TP':>6}{'FP':>6}{'FN':>6}{'P':>9}{'R':>9}{'F1':>9}"]
        for t, s in self.per_type.items():
            rows.append(f"{t:<16}{s.tp:>6}{s.fp:>6}{s.fn:>6}"
                        f"{100 * s.precision:>9.2f}{100 * s.recall:>9.2f}{100 * s.f1:>9.2f}")
        m = self.micro
        rows.append(f"{'micro':<16}{m.tp:>6}{m.fp:>6}{m.fn:>6}"
                    f"{100 * m.precision:>9.2f}{100 * m.recall:>9.2f}{100 * m.f1:>9.2f}")
        rows.append(f"{'macro':<16}{'':>18}{100 * self.macro_precision:>9.2f}"
                    f"{100 * self.macro_recall:>9.2f}{100 * self.macro_f1:>9.2f}")
        return "\n".join(rows) + "\n"


def _key(span):
    if hasattr(span, "key"):
        return span.key
    return tuple(span)


def exact_match_score(gold: Sequence[Sequence], predicted: Sequence[Sequence]) -> EvalReport:
    """Score per-sentence span lists; spans are EntitySpan or (type, start, end) tuples."""
    if len(gold) != len(predicted):
        raise ValueError(f"gold has {len(gold)} sentences, prediction has {len(predicted)}")
    report = EvalReport()
    for g_spans, p_spans in zip(gold, predicted):
        remaining = Counter(_key(s) for s in g_spans)
        for s in p_spans:
            k = _key(s)
            if remaining[k] > 0:
                remaining[k] -= 1
                report.per_type[k[0]].tp += 1
            else:
                report.per_type[k[0]].fp += 1
        for k, n in remaining.items():
            report.per_type[k[0]].fn += n
    return report


def score_tag_output(gold_tags: Sequence[Sequence[int]], predicted_tags: Sequence[Sequence[int]]) -> EvalReport:
    if len(gold_tags) != len(predicted_tags):
        raise ValueError(f"gold has {len(gold_tags)} sentences, prediction has {len(predicted_tags)}")
    for i, (g, p) in enumerate(zip(gold_tags, predicted_tags)):
        if len(g) != len(p):
            raise ValueError(f"sentence {i}: {len(g)} gold tags but {len(p)} predicted")
    return exact_match_score([bio_to_spans(g) for g in gold_tags], [bio_to_spans(p) for p in predicted_tags])
