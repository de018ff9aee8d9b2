"""Gold-corpus records (one JSON object per sentence) and corpus validation."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator

from .phonology import PhonemeString, UnknownSymbol, normalize, parse_iast, DEFAULT_GEMINATION_TRIGGERS

REQUIRED_FIELDS = ("sent_id", "text", "chunks", "lemmas", "cng")


class MalformedRecord(ValueError):
    def __init__(self, reason: str, sent_id: Any = None, lineno: int | None = None):
        self.reason = reason
        self.sent_id = sent_id
        self.lineno = lineno
        context = []
        if lineno is not None:
            context.append(f"line {lineno}")
        if sent_id is not None:
            context.append(f"sentence {sent_id}")
        prefix = f"{', '.join(context)}: " if context else ""
        super().__init__(f"{prefix}{reason}")


@dataclass(frozen=True)
class DcsSentence:
    sent_id: int
    text: PhonemeString
    chunks: tuple[PhonemeString, ...]
    lemmas: tuple[tuple[PhonemeString, ...], ...]
    cngs: tuple[tuple[int, ...], ...]

    def slots(self) -> Iterator[tuple[int, int, PhonemeString, int]]:
        """Yield ``(chunk, occurrence, lemma, cng)`` for every analysed lemma."""
        for i, (lemmas, codes) in enumerate(zip(self.lemmas, self.cngs)):
            for j, (lemma, code) in enumerate(zip(lemmas, codes)):
                yield i, j, lemma, code

    def normalized(self, triggers=DEFAULT_GEMINATION_TRIGGERS) -> "DcsSentence":
        return DcsSentence(
            sent_id=self.sent_id,
            text=normalize(self.text, triggers),
            chunks=tuple(normalize(c, triggers) for c in self.chunks),
            lemmas=tuple(tuple(normalize(lem, triggers) for lem in ls) for ls in self.lemmas),
            cngs=self.cngs,
        )

    def to_json(self) -> dict:
        return {
            "sent_id": self.sent_id,
            "text": str(self.text),
            "chunks": [str(c) for c in self.chunks],
            "lemmas": [[str(lem) for lem in ls] for ls in self.lemmas],
            "cng": [list(cs) for cs in self.cngs],
        }


class IssueKind(enum.Enum):
    LengthMismatch = "LengthMismatch"
    EmptyChunk = "EmptyChunk"
    BadPhoneme = "BadPhoneme"
    DuplicateId = "DuplicateId"
    Malformed = "Malformed"


@dataclass(frozen=True)
class CorpusIssue:
    sent_id: Any
    kind: IssueKind
    detail: str


def _parse_text(value: Any, sent_id: Any, what: str) -> PhonemeString:
    if not isinstance(value, str):
        raise MalformedRecord(f"{what} must be a string", sent_id)
    try:
        return parse_iast(value)
    except UnknownSymbol as exc:
        exc.sent_id = sent_id
        exc.args = (f"{exc.args[0]} in {what} of sentence {sent_id}",)
        raise


def parse_dcs_record(line: str | dict, lineno: int | None = None) -> DcsSentence:
    """Parse one corpus line (or an already-decoded object) into a :class:`DcsSentence`.

    Raises :class:`MalformedRecord` for structural problems and
    :class:`UnknownSymbol` (carrying ``sent_id``) for characters outside IAST.
    """
    if isinstance(line, dict):
        obj = line
    else:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"invalid JSON: {exc.msg}", lineno=lineno) from None
    if not isinstance(obj, dict):
        raise MalformedRecord("record is not a JSON object", lineno=lineno)
    sent_id = obj.get("sent_id")
    missing = [k for k in REQUIRED_FIELDS if k not in obj]
    if missing:
        raise MalformedRecord(f"missing field(s) {', '.join(missing)}", sent_id, lineno)
    if not isinstance(sent_id, int) or isinstance(sent_id, bool):
        raise MalformedRecord("sent_id must be an integer", sent_id, lineno)

    chunks, lemmas, cngs = obj["chunks"], obj["lemmas"], obj["cng"]
    if not all(isinstance(x, list) for x in (chunks, lemmas, cngs)):
        raise MalformedRecord("chunks, lemmas and cng must be lists", sent_id, lineno)
    if not chunks:
        raise MalformedRecord("record has no chunks", sent_id, lineno)
    if not (len(chunks) == len(lemmas) == len(cngs)):
        raise MalformedRecord("length mismatch", sent_id, lineno)
    for i, (ls, cs) in enumerate(zip(lemmas, cngs)):
        if not isinstance(ls, list) or not isinstance(cs, list):
            raise MalformedRecord(f"chunk {i}: lemma and cng entries must be lists", sent_id, lineno)
        if not ls or not cs:
            raise MalformedRecord("empty chunk analysis", sent_id, lineno)
        if len(ls) != len(cs):
            raise MalformedRecord("length mismatch", sent_id, lineno)
        for c in cs:
            # codes arrive as ints or, as in the DCS objects, numeric strings
            if isinstance(c, bool) or not isinstance(c, (int, str)):
                raise MalformedRecord(f"chunk {i}: CNG code {c!r} is not an integer", sent_id, lineno)
            try:
                int(c)
            except ValueError:
                raise MalformedRecord(f"chunk {i}: CNG code {c!r} is not an integer", sent_id, lineno) from None
        for lem in ls:
            if isinstance(lem, str) and lem and lem[-1].isdigit():
                raise MalformedRecord(f"chunk {i}: lemma {lem!r} carries a homonymy index", sent_id, lineno)

    return DcsSentence(
        sent_id=sent_id,
        text=_parse_text(obj["text"], sent_id, "text"),
        chunks=tuple(_parse_text(c, sent_id, "chunk") for c in chunks),
        lemmas=tuple(tuple(_parse_text(lem, sent_id, "lemma") for lem in ls) for ls in lemmas),
        cngs=tuple(tuple(int(c) for c in cs) for cs in cngs),
    )


def _issue_kind(exc: MalformedRecord) -> IssueKind:
    if exc.reason == "length mismatch":
        return IssueKind.LengthMismatch
    if exc.reason == "empty chunk analysis":
        return IssueKind.EmptyChunk
    if "homonymy index" in exc.reason:
        return IssueKind.BadPhoneme
    return IssueKind.Malformed


def validate_corpus(records: Iterable[str | dict | DcsSentence]) -> list[CorpusIssue]:
    """Collect every problem in a corpus; an empty list means the corpus is clean."""
    issues: list[CorpusIssue] = []
    seen: set[int] = set()
    for lineno, rec in enumerate(records, 1):
        if not isinstance(rec, DcsSentence):
            try:
                rec = parse_dcs_record(rec, lineno)
            except UnknownSymbol as exc:
                issues.append(CorpusIssue(exc.sent_id, IssueKind.BadPhoneme, str(exc)))
                continue
            except MalformedRecord as exc:
                issues.append(CorpusIssue(exc.sent_id, _issue_kind(exc), str(exc)))
                continue
        if rec.sent_id in seen:
            issues.append(CorpusIssue(rec.sent_id, IssueKind.DuplicateId, f"sent_id {rec.sent_id} repeated"))
        seen.add(rec.sent_id)
    return issues


def iter_corpus_lines(path: Path) -> Iterator[tuple[int, str]]:
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if line.strip():
                yield lineno, line


def read_corpus(path: Path) -> list[DcsSentence]:
    """Parse a whole corpus file; the first bad line aborts with its line number."""
    records = []
    seen: set[int] = set()
    for lineno, line in iter_corpus_lines(path):
        try:
            rec = parse_dcs_record(line, lineno)
        except UnknownSymbol as exc:
            raise MalformedRecord(str(exc), exc.sent_id, lineno) from exc
        if rec.sent_id in seen:
            raise MalformedRecord(f"duplicate sent_id {rec.sent_id}", rec.sent_id, lineno)
        seen.add(rec.sent_id)
        records.append(rec)
    return records
