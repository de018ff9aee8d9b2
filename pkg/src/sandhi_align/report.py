"""Corpus-level statistics and gold-corpus emission."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from decimal import Decimal, ROUND_HALF_UP
from typing import Iterable, Mapping

from .aligner import AlignmentResult, DiagnosticCode
from .corpus import DcsSentence
from .seg_graph import SegGraph


def percent(part: int, whole: int) -> float:
    """``part / whole`` as a percentage rounded half-up to one decimal; 0 when ``whole`` is 0."""
    if whole == 0:
        return 0.0
    value = Decimal(part) * 100 / Decimal(whole)
    return float(value.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class Report:
    cat1: int = 0
    cat2: int = 0
    cat3: int = 0
    cat4: int = 0
    sent_for_modification: int = 0
    modified_count: int = 0
    unmodified_unmatched: int = 0
    diagnostics: Mapping[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return self.cat1 + self.cat2 + self.cat3 + self.cat4

    @property
    def fully_matched(self) -> int:
        return self.cat1 + self.cat2

    @property
    def modified_unmatched(self) -> int:
        return self.cat3 + self.cat4 - self.unmodified_unmatched

    @property
    def matched_pct(self) -> float:
        return percent(self.fully_matched, self.total)

    @property
    def single_pct(self) -> float:
        """Share of fully matched sentences whose every lemma has exactly one parallel."""
        return percent(self.cat1, self.fully_matched)

    def to_json(self) -> dict:
        return {
            "total": self.total,
            "categories": {"1": self.cat1, "2": self.cat2, "3": self.cat3, "4": self.cat4},
            "fully_matched": self.fully_matched,
            "sent_for_modification": self.sent_for_modification,
            "modified_count": self.modified_count,
            "unmodified_unmatched": self.unmodified_unmatched,
            "modified_unmatched": self.modified_unmatched,
            "diagnostics": dict(sorted(self.diagnostics.items())),
            "matched_pct": self.matched_pct,
            "single_pct": self.single_pct,
        }


def summarize(results: Iterable[AlignmentResult]) -> Report:
    cats: Counter = Counter()
    diag: Counter = Counter()
    sent_for_mod = modified = unmodified_unmatched = 0
    for r in results:
        cats[r.category] += 1
        if r.category_before in (3, 4):
            sent_for_mod += 1
            if r.modified:
                modified += 1
        if r.category in (3, 4) and not r.modified:
            unmodified_unmatched += 1
        diag.update(d.code.value for d in r.diagnostics)
    return Report(
        cat1=cats[1], cat2=cats[2], cat3=cats[3], cat4=cats[4],
        sent_for_modification=sent_for_mod,
        modified_count=modified,
        unmodified_unmatched=unmodified_unmatched,
        diagnostics={code.value: diag[code.value] for code in DiagnosticCode if diag[code.value]},
    )


def _segment_entry(m, node) -> dict:
    entry = {
        "chunk": m.chunk,
        "occurrence": m.occurrence,
        "gold_lemma": str(m.lemma),
        "gold_cng": m.cng,
        "stage": m.stage.value if m.stage else None,
    }
    data = node.to_json()
    data["node_id"] = data.pop("id")
    entry.update(data)
    return entry


def emit_gold(results: Iterable[AlignmentResult], corpus: Mapping[int, DcsSentence],
              graphs: Mapping[int, SegGraph] | None = None) -> list[dict]:
    """Gold records for category-1 sentences, segments in surface order."""
    out = []
    for r in sorted(results, key=lambda r: r.sent_id):
        if r.category != 1:
            continue
        g = (graphs or {}).get(r.sent_id) or r.graph
        if g is None:
            raise ValueError(f"no graph for sentence {r.sent_id}")
        segs = [(g.nodes[m.node_ids[0]], m) for m in r.match_sets]
        segs.sort(key=lambda pair: (pair[0].char_pos.start, pair[1].chunk, pair[1].occurrence))
        rec = corpus[r.sent_id]
        out.append({
            "sent_id": r.sent_id,
            "text": str(rec.text),
            "segments": [_segment_entry(m, node) for node, m in segs],
        })
    return out


def sidecar_records(results: Iterable[AlignmentResult], categories: tuple[int, ...]) -> list[dict]:
    """Sentences in ``categories`` with the slots that kept them out of the gold file."""
    out = []
    for r in sorted(results, key=lambda r: r.sent_id):
        if r.category not in categories:
            continue
        out.append({
            "sent_id": r.sent_id,
            "category": r.category,
            "multiple": [m.to_json() for m in r.match_sets if len(m) > 1],
            "missing": [m.to_json() for m in r.match_sets if len(m) == 0],
        })
    return out
