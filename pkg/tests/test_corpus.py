import json

import pytest

from sandhi_align.corpus import (
    IssueKind,
    MalformedRecord,
    parse_dcs_record,
    read_corpus,
    validate_corpus,
)
from sandhi_align.phonology import UnknownSymbol, normalize_anunasika, parse_iast

from conftest import record

MAUKTIKA = {
    "sent_id": 83,
    "text": "mauktike yadi saṃdehaḥ kṛtrime sahaje'pi vā",
    "chunks": ["mauktika", "yadi", "saṃdeha", "kṛtrima", "sahaja", "api", "vā"],
    "lemmas": [["mauktika"], ["yadi"], ["saṃdeha"], ["kṛtrima"], ["sahaja"], ["api"], ["vā"]],
    "cng": [["171"], ["2"], ["29"], ["171"], ["171"], ["2"], ["2"]],
}


def test_mauktika_record():
    rec = parse_dcs_record(json.dumps(MAUKTIKA, ensure_ascii=False))
    assert rec.sent_id == 83
    assert len(rec.chunks) == 7
    assert rec.cngs == ((171,), (2,), (29,), (171,), (171,), (2,), (2,))
    assert rec.lemmas[2] == (parse_iast("saṃdeha"),)
    assert [s[:2] for s in rec.slots()] == [(i, 0) for i in range(7)]


def test_to_json_round_trip():
    rec = parse_dcs_record(MAUKTIKA)
    assert parse_dcs_record(rec.to_json()) == rec


@pytest.mark.parametrize("mutate, reason", [
    (lambda r: r.update(lemmas=r["lemmas"][:2], chunks=r["chunks"][:3], cng=r["cng"][:3]), "length mismatch"),
    (lambda r: r["lemmas"].__setitem__(1, []), "empty chunk analysis"),
    (lambda r: r["cng"].__setitem__(0, [171, 2]), "length mismatch"),
])
def test_structural_errors(mutate, reason):
    obj = json.loads(json.dumps(MAUKTIKA))
    mutate(obj)
    with pytest.raises(MalformedRecord) as exc:
        parse_dcs_record(obj)
    assert exc.value.reason == reason
    assert exc.value.sent_id == 83


@pytest.mark.parametrize("line", [
    "{not json",
    "[1, 2]",
    '{"sent_id": 1, "text": "a"}',
    '{"sent_id": "x", "text": "a", "chunks": ["a"], "lemmas": [["a"]], "cng": [[1]]}',
    '{"sent_id": 1, "text": "a", "chunks": ["a"], "lemmas": [["a"]], "cng": [["x"]]}',
    '{"sent_id": 1, "text": "a", "chunks": ["a"], "lemmas": [["siddha2"]], "cng": [[1]]}',
])
def test_malformed_lines(line):
    with pytest.raises(MalformedRecord):
        parse_dcs_record(line)


def test_unknown_symbol_carries_sentence():
    with pytest.raises(UnknownSymbol) as exc:
        parse_dcs_record(record(7, "qadi", [["yadi"]], [[2]]))
    assert exc.value.sent_id == 7


def test_validate_clean_and_dirty():
    clean = [record(i, "deva", [["deva"]], [[29]]) for i in (1, 2, 3)]
    assert validate_corpus(clean) == []

    issues = validate_corpus(clean + [MAUKTIKA, MAUKTIKA])
    assert [(i.sent_id, i.kind) for i in issues] == [(83, IssueKind.DuplicateId)]

    issues = validate_corpus([record(5, "qa", [["a"]], [[2]])])
    assert [(i.sent_id, i.kind) for i in issues] == [(5, IssueKind.BadPhoneme)]

    issues = validate_corpus([record(6, "a b", [["a"]], [[2]], chunks=["a", "b"]),
                              record(8, "a", [[]], [[]])])
    assert [i.kind for i in issues] == [IssueKind.LengthMismatch, IssueKind.EmptyChunk]


def test_validate_does_not_mutate():
    recs = [json.loads(json.dumps(MAUKTIKA))]
    snapshot = json.dumps(recs)
    validate_corpus(recs)
    assert json.dumps(recs) == snapshot


def test_read_corpus_reports_line(tmp_path):
    p = tmp_path / "c.jsonl"
    good = json.dumps(MAUKTIKA, ensure_ascii=False)
    p.write_text(good + "\n\n" + good.replace("83", "84", 1) + "\n" + "{oops\n", encoding="utf-8")
    with pytest.raises(MalformedRecord) as exc:
        read_corpus(p)
    assert exc.value.lineno == 4
    p.write_text(good + "\n" + good + "\n", encoding="utf-8")
    with pytest.raises(MalformedRecord, match="duplicate"):
        read_corpus(p)


def test_fixture_parsing_is_total(fixture_corpus):
    assert len(fixture_corpus) == 20
    assert len({r.sent_id for r in fixture_corpus}) == 20


def test_chunk_reassembly(fixture_corpus):
    # every fixture except the mauktika record (stem chunks) uses surface chunks
    checked = 0
    for rec in fixture_corpus:
        if rec.sent_id == 83:
            continue
        joined = parse_iast(" ".join(str(c) for c in rec.chunks))
        assert normalize_anunasika(joined) == normalize_anunasika(rec.text)
        checked += 1
    assert checked == 19
