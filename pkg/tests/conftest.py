import json
import sys
from pathlib import Path

import pytest

from sandhi_align.aligner import RuleSet, default_rule_dir
from sandhi_align.corpus import parse_dcs_record
from sandhi_align.seg_graph import CandidateSegment

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def rules() -> RuleSet:
    return RuleSet.load(default_rule_dir())


@pytest.fixture(scope="session")
def sandhi(rules):
    return rules.sandhi


@pytest.fixture(scope="session")
def fixture_corpus():
    with open(FIXTURES / "corpus.jsonl", encoding="utf-8") as f:
        return [parse_dcs_record(line) for line in f if line.strip()]


@pytest.fixture(scope="session")
def fixture_analyses():
    out = {}
    with open(FIXTURES / "analyses.jsonl", encoding="utf-8") as f:
        for line in f:
            obj = json.loads(line)
            out[obj["sent_id"]] = [CandidateSegment.from_json(s) for s in obj["segments"]]
    return out


def seg(id, word, lemma, cng, span, **kw) -> CandidateSegment:
    return CandidateSegment(id=id, word=word, lemma=lemma, cng=cng, char_pos=span, **kw)


def record(sent_id, text, lemmas, cngs, chunks=None) -> dict:
    return {"sent_id": sent_id, "text": text, "chunks": chunks or text.split(),
            "lemmas": lemmas, "cng": cngs}


def pytest_terminal_summary(terminalreporter):
    verdicts = getattr(sys.modules.get("test_acceptance"), "VERDICTS", None)
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for line in verdicts:
            terminalreporter.write_line(line)
