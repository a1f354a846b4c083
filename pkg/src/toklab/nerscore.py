"""Exact-match entity scoring and token accuracy."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from toklab.charts import grouped_bars
from toklab.text import NerDocument, is_valid_iob2


class EntitySpan(NamedTuple):
    type: str
    start: int
    end: int


def extract_entities(tags: Sequence[str]) -> list[EntitySpan]:
    """Maximal ``B-T I-T*`` runs as half-open word spans."""
    assert is_valid_iob2(tags), f"invalid IOB2 sequence: {list(tags)}"
    spans: list[EntitySpan] = []
    start = None
    kind = None
    for i, tag in enumerate(tags):
        if tag.startswith("I-"):
            continue
        if start is not None:
            spans.append(EntitySpan(kind, start, i))
            start = kind = None
        if tag.startswith("B-"):
            start, kind = i, tag[2:]
    if start is not None:
        spans.append(EntitySpan(kind, start, len(tags)))
    return spans


def render_tags(spans: Sequence[EntitySpan], length: int) -> list[str]:
    tags = ["O"] * length
    for span in spans:
        tags[span.start] = "B-" + span.type
        for i in range(span.start + 1, span.end):
            tags[i] = "I-" + span.type
    return tags


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    # 2PR/(P+R) rewritten over integer counts, so the result is correctly rounded
    f = 2 * tp / (2 * tp + fp + fn) if tp else 0.0
    return p, r, f


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "PRF":
        return cls(*_prf(tp, fp, fn), tp, fp, fn)


@dataclass(frozen=True)
class NerScore:
    overall: PRF
    token_accuracy: float
    per_type: dict[str, PRF] = field(default_factory=dict)
    support: dict[str, int] = field(default_factory=dict)
    words: int = 0

    @property
    def precision(self) -> float:
        return self.overall.precision

    @property
    def recall(self) -> float:
        return self.overall.recall

    @property
    def f1(self) -> float:
        return self.overall.f1

    @property
    def macro_f1(self) -> float:
        if not self.per_type:
            return 0.0
        return sum(s.f1 for s in self.per_type.values()) / len(self.per_type)

    def to_dict(self) -> dict:
        o = self.overall
        return {
            "overall": {"p": o.precision, "r": o.recall, "f1": o.f1,
                        "acc": self.token_accuracy, "tp": o.tp, "fp": o.fp, "fn": o.fn},
            "macro": {"f1": self.macro_f1},
            "per_type": {t: {"p": s.precision, "r": s.recall, "f1": s.f1,
                             "tp": s.tp, "fp": s.fp, "fn": s.fn}
                         for t, s in sorted(self.per_type.items())},
            "support": dict(sorted(self.support.items())),
            "words": self.words,
        }


def score_tags(gold: Sequence[Sequence[str]], pred: Sequence[Sequence[str]]) -> NerScore:
    """Score parallel lists of per-sentence tag sequences."""
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} gold sentences vs {len(pred)} predicted")
    tp: Counter = Counter()
    fp: Counter = Counter()
    fn: Counter = Counter()
    support: Counter = Counter()
    correct = total = 0
    for i, (g, p) in enumerate(zip(gold, pred)):
        if len(g) != len(p):
            raise ValueError(f"sentence {i}: {len(g)} gold tags vs {len(p)} predicted")
        correct += sum(a == b for a, b in zip(g, p))
        total += len(g)
        gold_spans = set(extract_entities(g))
        pred_spans = set(extract_entities(p))
        for span in gold_spans:
            support[span.type] += 1
            (tp if span in pred_spans else fn)[span.type] += 1
        for span in pred_spans - gold_spans:
            fp[span.type] += 1
    types = sorted(set(tp) | set(fp) | set(fn))
    per_type = {t: PRF.from_counts(tp[t], fp[t], fn[t]) for t in types}
    overall = PRF.from_counts(sum(tp.values()), sum(fp.values()), sum(fn.values()))
    return NerScore(overall, correct / total if total else 0.0, per_type,
                    {t: support[t] for t in types}, total)


def entity_prf(gold_doc: NerDocument, pred_doc: NerDocument) -> NerScore:
    return score_tags([s.tags for s in gold_doc.sentences],
                      [s.tags for s in pred_doc.sentences])


REPORT_COLUMNS = ["target", "source", "tokenizer", "precision", "recall", "f1",
                  "macro_f1", "accuracy", "tp", "fp", "fn", "words"]


@dataclass(frozen=True)
class MetricsReport:
    """Zero-shot comparison table: one row per (target, source, tokenizer)."""

    rows: list[dict]

    def to_dict(self) -> dict:
        return {"columns": REPORT_COLUMNS, "rows": self.rows}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for row in self.rows:
            writer.writerow([f"{row[c]:.6f}" if isinstance(row[c], float) else row[c]
                             for c in REPORT_COLUMNS])
        return buf.getvalue()

    def to_svg(self) -> str:
        targets = list(dict.fromkeys(r["target"] for r in self.rows))
        multi = len({r["source"] for r in self.rows}) > 1
        label = (lambda r: f"{r['source']} {r['tokenizer']}") if multi else (lambda r: r["tokenizer"])
        series = sorted({label(r) for r in self.rows})
        values = {(r["target"], label(r)): 100 * r["f1"] for r in self.rows}
        return grouped_bars("Zero-shot NER F1 by target language", targets, series,
                            values, y_label="entity F1 (%)")


def compare_report(scores: Sequence[tuple[str, tuple[str, str], NerScore]]) -> MetricsReport:
    """Build the comparison table from ``(tokenizer, (source, target), score)`` triples."""
    rows = []
    for tokenizer, (source, target), s in scores:
        o = s.overall
        rows.append({"target": target, "source": source, "tokenizer": tokenizer,
                     "precision": o.precision, "recall": o.recall, "f1": o.f1,
                     "macro_f1": s.macro_f1, "accuracy": s.token_accuracy,
                     "tp": o.tp, "fp": o.fp, "fn": o.fn, "words": s.words})
    rows.sort(key=lambda r: (r["target"], r["tokenizer"], r["source"]))
    return MetricsReport(rows)
