"""Align gold lemma/CNG annotations with candidate-segment graphs.

Per sentence: every (chunk, lemma) slot is matched against the graph by
four comparisons tried in order (lemma+CNG, derived stem, pronoun
convention, compound-initial surface).  Sentences with an unmatched slot
get synthetic nodes (causative pairs, preverb joins, merged compound
components) and their unmatched slots are matched again.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import DcsSentence
from .morph_tags import CngTable
from .phonology import (
    DEFAULT_GEMINATION_TRIGGERS,
    HYPHEN,
    MissingRule,
    PhonemeString,
    SandhiRuleTable,
    UnknownPreverb,
    apply_preverb,
    load_gemination_triggers,
    load_sandhi_rules,
    parse_iast,
    vowel_sandhi_join,
)
from .seg_graph import CandidateSegment, Provenance, SegGraph, add_synthetic_node

DEFAULT_MAX_COMPONENTS = 12
MODIFICATIONS = ("causative", "preverb", "compound")


class Stage(str, enum.Enum):
    LemmaCng = "LemmaCng"
    DerivedStem = "DerivedStem"
    PronounTable = "PronounTable"
    IicSegment = "IicSegment"
    CausativePair = "CausativePair"
    PreverbJoin = "PreverbJoin"
    CompoundMerge = "CompoundMerge"


_PROVENANCE_STAGE = {
    Provenance.causative: Stage.CausativePair,
    Provenance.preverb_join: Stage.PreverbJoin,
    Provenance.compound_merge: Stage.CompoundMerge,
}


class DiagnosticCode(str, enum.Enum):
    CngManyToOne = "CngManyToOne"
    DerivInflMismatch = "DerivInflMismatch"
    MultiCompoundSplit = "MultiCompoundSplit"
    UnanalyzedWord = "UnanalyzedWord"
    SecondaryDerivative = "SecondaryDerivative"
    IndeclinableClass = "IndeclinableClass"
    IicPfpMismatch = "IicPfpMismatch"
    SandhiFailure = "SandhiFailure"
    TooManyComponents = "TooManyComponents"


@dataclass(frozen=True, order=True)
class Diagnostic:
    chunk: int
    occurrence: int
    code: DiagnosticCode
    detail: str

    def to_json(self) -> dict:
        return {"code": self.code.value, "chunk": self.chunk, "occurrence": self.occurrence, "detail": self.detail}

    @classmethod
    def from_json(cls, obj: dict) -> "Diagnostic":
        return cls(obj["chunk"], obj["occurrence"], DiagnosticCode(obj["code"]), obj["detail"])


class TooManyComponents(ValueError):
    pass


@dataclass(frozen=True)
class MatchSet:
    chunk: int
    occurrence: int
    lemma: PhonemeString
    cng: int
    node_ids: tuple[int, ...] = ()
    stage: Stage | None = None
    via: Stage | None = None

    def __len__(self):
        return len(self.node_ids)

    def to_json(self) -> dict:
        return {
            "chunk": self.chunk,
            "occurrence": self.occurrence,
            "lemma": str(self.lemma),
            "cng": self.cng,
            "stage": self.stage.value if self.stage else None,
            "via": self.via.value if self.via else None,
            "node_ids": list(self.node_ids),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MatchSet":
        return cls(
            chunk=obj["chunk"],
            occurrence=obj["occurrence"],
            lemma=parse_iast(obj["lemma"]),
            cng=obj["cng"],
            node_ids=tuple(obj["node_ids"]),
            stage=Stage(obj["stage"]) if obj.get("stage") else None,
            via=Stage(obj["via"]) if obj.get("via") else None,
        )


@dataclass(frozen=True)
class AlignmentResult:
    sent_id: int
    match_sets: tuple[MatchSet, ...]
    category: int
    category_before: int
    synthesized: tuple[int, ...] = ()
    diagnostics: tuple[Diagnostic, ...] = ()
    graph: SegGraph | None = field(default=None, compare=False, repr=False)

    @property
    def modified(self) -> bool:
        return bool(self.synthesized)

    def to_json(self) -> dict:
        return {
            "sent_id": self.sent_id,
            "category_before": self.category_before,
            "category": self.category,
            "match_sets": [m.to_json() for m in self.match_sets],
            "synthesized": list(self.synthesized),
            "diagnostics": [d.to_json() for d in self.diagnostics],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "AlignmentResult":
        return cls(
            sent_id=obj["sent_id"],
            match_sets=tuple(MatchSet.from_json(m) for m in obj["match_sets"]),
            category=obj["category"],
            category_before=obj["category_before"],
            synthesized=tuple(obj.get("synthesized", ())),
            diagnostics=tuple(Diagnostic.from_json(d) for d in obj.get("diagnostics", ())),
        )


# ---------------------------------------------------------------- rule data

def _key(ps: PhonemeString | None) -> PhonemeString | None:
    return None if ps is None else ps.stripped()


def _read_pairs(path: Path) -> list[tuple[PhonemeString, PhonemeString]]:
    pairs = []
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise ValueError(f"{path}:{lineno}: expected two tab-separated columns")
            pairs.append((parse_iast(cols[0].strip()), parse_iast(cols[1].strip())))
    return pairs


def _injective(pairs, what: str) -> dict:
    forward: dict = {}
    backward: dict = {}
    for a, b in pairs:
        if forward.get(a, b) != b or backward.get(b, a) != a:
            raise ValueError(f"{what}: mapping {a} <-> {b} is not one-to-one")
        forward[a], backward[b] = b, a
    return forward


@dataclass(frozen=True)
class ModificationTables:
    causative_pairs: dict = field(default_factory=dict)  # joined lemma -> base root
    pronoun_map: dict = field(default_factory=dict)  # gold-corpus stem -> segmenter stem

    @classmethod
    def from_pairs(cls, causative=(), pronouns=()) -> "ModificationTables":
        def keyed(pairs):
            return [(PhonemeString(a).stripped(), PhonemeString(b).stripped()) for a, b in pairs]
        return cls(
            causative_pairs=_injective(keyed(causative), "causative pairs"),
            pronoun_map=_injective(keyed(pronouns), "pronoun map"),
        )

    @classmethod
    def load(cls, causative_file: Path, pronoun_file: Path) -> "ModificationTables":
        return cls.from_pairs(_read_pairs(causative_file), _read_pairs(pronoun_file))


@dataclass(frozen=True)
class RuleSet:
    """Everything the aligner reads from the rule directory."""

    sandhi: SandhiRuleTable
    cng: CngTable
    tables: ModificationTables
    gemination: frozenset = DEFAULT_GEMINATION_TRIGGERS
    taddhita: frozenset = frozenset()

    @classmethod
    def load(cls, rule_dir: Path) -> "RuleSet":
        d = Path(rule_dir)
        taddhita = set()
        with open(d / "taddhita_suffixes.txt", encoding="utf-8") as f:
            for raw in f:
                line = raw.split("#", 1)[0].strip()
                if line:
                    taddhita.add(parse_iast(line))
        return cls(
            sandhi=load_sandhi_rules(d / "sandhi_rules.txt", d / "preverbs.tsv"),
            cng=CngTable.load(d / "cng_table.tsv"),
            tables=ModificationTables.load(d / "causative_pairs.tsv", d / "pronoun_map.tsv"),
            gemination=load_gemination_triggers(d / "gemination.txt"),
            taddhita=frozenset(taddhita),
        )


RULE_FILES = (
    "sandhi_rules.txt", "preverbs.tsv", "cng_table.tsv", "causative_pairs.tsv",
    "pronoun_map.tsv", "gemination.txt", "taddhita_suffixes.txt",
)


def default_rule_dir() -> Path:
    return Path(__file__).parent / "data"


# ---------------------------------------------------------------- matching

def _cng_ok(code: int, node_code: int | None, morph: Iterable[str], table: CngTable) -> bool:
    return code == node_code or code in table.codes_of_any(morph)


def _match_slot(lemma: PhonemeString, code: int, chunk: PhonemeString,
                nodes: Sequence[CandidateSegment], rules: RuleSet) -> tuple[Stage | None, tuple[int, ...]]:
    want = _key(lemma)
    table = rules.cng

    def found(stage, hits):
        return stage, tuple(sorted(n.id for n in hits))

    hits = [n for n in nodes if _key(n.lemma) == want and _cng_ok(code, n.cng, n.morph, table)]
    if hits:
        return found(Stage.LemmaCng, hits)

    hits = [
        n for n in nodes
        if n.der_lemma is not None and _key(n.der_lemma) == want
        and (_cng_ok(code, n.der_cng, n.der_morph, table) or _cng_ok(code, n.cng, n.morph, table))
    ]
    if hits:
        return found(Stage.DerivedStem, hits)

    mapped = rules.tables.pronoun_map.get(want)
    if mapped is not None:
        hits = [n for n in nodes if _key(n.lemma) == mapped and _cng_ok(code, n.cng, n.morph, table)]
        if hits:
            return found(Stage.PronounTable, hits)

    # for compound members the gold lemma is just the split-off surface form
    surfaces = {want, _key(chunk)}
    hits = [n for n in nodes if n.is_iic and _key(n.word) in surfaces]
    if hits:
        return found(Stage.IicSegment, hits)
    return None, ()


def match_lemma(rec: DcsSentence, g: SegGraph, rules: RuleSet) -> list[MatchSet]:
    """One :class:`MatchSet` per (chunk, lemma) slot; the first comparison that finds nodes wins."""
    nodes = list(g)
    out = []
    for chunk, occ, lemma, code in rec.slots():
        stage, ids = _match_slot(lemma, code, rec.chunks[chunk], nodes, rules)
        out.append(MatchSet(chunk, occ, lemma, code, ids, stage, stage))
    return out


def categorize(match_sets: Iterable[MatchSet | int]) -> int:
    """1: all unique, 2: some multiple, 3: some missing, 4: missing and multiple."""
    sizes = [m if isinstance(m, int) else len(m) for m in match_sets]
    missing = any(s == 0 for s in sizes)
    multiple = any(s > 1 for s in sizes)
    if missing:
        return 4 if multiple else 3
    return 2 if multiple else 1


# ---------------------------------------------------------------- partitions

def enumerate_compound_partitions(components: Sequence, cap: int = DEFAULT_MAX_COMPONENTS) -> list[list[list]]:
    """All ways to cut an ordered component list into contiguous groups.

    Bit ``k`` of the counter means "cut after component ``k``", so the
    first partition is the whole list as one group and the last is every
    component on its own.
    """
    n = len(components)
    if n < 1:
        raise ValueError("need at least one component")
    if n > cap:
        raise TooManyComponents(f"{n} components exceed the cap of {cap}")
    items = list(components)
    partitions = []
    for mask in range(1 << (n - 1)):
        groups, current = [], [items[0]]
        for k in range(1, n):
            if mask >> (k - 1) & 1:
                groups.append(current)
                current = []
            current.append(items[k])
        groups.append(current)
        partitions.append(groups)
    return partitions


def count_bracketings(n: int) -> int:
    """Number of full binary bracketings of ``n`` leaves (Catalan number C(n-1))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = n - 1
    return math.comb(2 * m, m) // (m + 1)


# ---------------------------------------------------------------- modifications

class _Builder:
    """Accumulates synthetic nodes, skipping ones already present."""

    def __init__(self, g: SegGraph):
        self.graph = g
        self.seen = {n.content_key() for n in g}
        self.added: list[int] = []

    def add(self, template: CandidateSegment, provenance: Provenance, **changes) -> None:
        node = replace(template, id=self.graph.next_id(), synthetic=provenance, length_word=-1, **changes)
        key = node.content_key()
        if key in self.seen:
            return
        self.seen.add(key)
        self.graph = add_synthetic_node(self.graph, node)
        self.added.append(node.id)


def _originals(g: SegGraph) -> list[CandidateSegment]:
    return [n for n in g if n.synthetic is Provenance.none]


def _unmatched_lemmas(rec: DcsSentence, unmatched) -> set:
    if unmatched is None:
        return {_key(lemma) for _, _, lemma, _ in rec.slots()}
    return {_key(parse_iast(x) if isinstance(x, str) else x) for x in unmatched}


def modify_causative(g: SegGraph, rec: DcsSentence, tables: ModificationTables,
                     unmatched=None) -> SegGraph:
    """Add a node carrying the joined causative lemma wherever its base root appears."""
    builder = _Builder(g)
    for joined in sorted(_unmatched_lemmas(rec, unmatched)):
        base = tables.causative_pairs.get(joined)
        if base is None:
            continue
        for n in _originals(g):
            if _key(n.lemma) == base:
                builder.add(n, Provenance.causative, lemma=joined)
            if n.der_lemma is not None and _key(n.der_lemma) == base:
                builder.add(n, Provenance.causative, der_lemma=joined)
    return builder.graph


def modify_preverb_join(g: SegGraph, sandhi: SandhiRuleTable,
                        diagnostics: list | None = None) -> SegGraph:
    """Add a node with the preverb sandhied onto the (derivational) lemma."""
    builder = _Builder(g)
    for n in _originals(g):
        if n.pre_verb is None and n.der_pre_verb is None:
            continue
        changes = {}
        for pv_field, lemma_field in (("pre_verb", "lemma"), ("der_pre_verb", "der_lemma")):
            pv, lemma = getattr(n, pv_field), getattr(n, lemma_field)
            if pv is None or lemma is None:
                continue
            try:
                changes[lemma_field] = apply_preverb(pv, lemma, sandhi)
                changes[pv_field] = None
            except (UnknownPreverb, MissingRule) as exc:
                if diagnostics is not None:
                    diagnostics.append(Diagnostic(-1, -1, DiagnosticCode.SandhiFailure, f"node {n.id}: {exc}"))
        if changes:
            builder.add(n, Provenance.preverb_join, **changes)
    return builder.graph


def _component_chains(nodes: list[CandidateSegment]) -> list[list[CandidateSegment]]:
    """Maximal runs of nodes whose spans abut end-to-start."""
    by_start: dict[int, list[CandidateSegment]] = {}
    ends = {n.char_pos.end for n in nodes}
    for n in nodes:
        by_start.setdefault(n.char_pos.start, []).append(n)
    chains = []

    def walk(path):
        nxt = by_start.get(path[-1].char_pos.end, [])
        if not nxt:
            chains.append(path)
            return
        for m in sorted(nxt, key=lambda x: x.id):
            walk(path + [m])

    for n in sorted(nodes, key=lambda x: (x.char_pos.start, x.id)):
        if n.char_pos.start not in ends:
            walk([n])
    return chains


def _join_forms(parts: list[PhonemeString], sandhi: SandhiRuleTable) -> tuple[PhonemeString | None, PhonemeString]:
    concat = PhonemeString()
    for p in parts:
        concat = concat + p
    joined = parts[0]
    try:
        for p in parts[1:]:
            joined = vowel_sandhi_join(joined, p, sandhi)
    except MissingRule:
        return None, concat
    return joined, concat


def modify_compound_merge(g: SegGraph, rec: DcsSentence, sandhi: SandhiRuleTable, unmatched=None,
                          max_components: int = DEFAULT_MAX_COMPONENTS,
                          diagnostics: list | None = None) -> SegGraph:
    """Join runs of compound components and keep joins that equal an unmatched gold lemma.

    Non-final components contribute their surface form, the final one its
    lemma; the new node's ``word`` keeps the parts hyphen-separated.
    """
    targets = _unmatched_lemmas(rec, unmatched)
    builder = _Builder(g)
    by_chunk: dict[int, list[CandidateSegment]] = {}
    for n in _originals(g):
        by_chunk.setdefault(n.chunk_no, []).append(n)

    for chunk_no in sorted(by_chunk):
        groups: dict[tuple[int, ...], list[CandidateSegment]] = {}
        for chain in _component_chains(by_chunk[chunk_no]):
            if len(chain) < 2:
                continue
            try:
                partitions = enumerate_compound_partitions(chain, max_components)
            except TooManyComponents as exc:
                if diagnostics is not None:
                    diagnostics.append(Diagnostic(-1, -1, DiagnosticCode.TooManyComponents,
                                                  f"chunk {chunk_no}: {exc}"))
                continue
            for partition in partitions:
                for group in partition:
                    if len(group) > 1:
                        groups.setdefault(tuple(n.id for n in group), group)

        for ids in sorted(groups):
            group = groups[ids]
            parts = [n.word.stripped() for n in group[:-1]] + [group[-1].lemma.stripped()]
            joined, concat = _join_forms(parts, sandhi)
            if joined is None and diagnostics is not None:
                diagnostics.append(Diagnostic(-1, -1, DiagnosticCode.SandhiFailure,
                                              f"chunk {chunk_no}: no vowel rule joining {'-'.join(map(str, parts))}"))
            lemma = joined if joined in targets else concat if concat in targets else None
            if lemma is None:
                continue
            word = parts[0]
            for p in parts[1:]:
                word = word + (HYPHEN,) + p
            head = group[-1]
            builder.add(
                head, Provenance.compound_merge,
                word=word, lemma=lemma,
                char_pos=(group[0].char_pos.start, head.char_pos.end),
                position=group[0].position, chunk_no=chunk_no, pre_verb=None,
                der_pre_verb=None, der_lemma=None, der_sense=frozenset(),
                der_morph=frozenset(), der_cng=None,
            )
    return builder.graph


# ---------------------------------------------------------------- diagnostics

def _slot_diagnostics(m: MatchSet, g: SegGraph, rules: RuleSet) -> list[Diagnostic]:
    out = []
    lemma = str(m.lemma)

    def diag(code, detail):
        out.append(Diagnostic(m.chunk, m.occurrence, code, f"{lemma}: {detail}"))

    nodes = [g.nodes[i] for i in m.node_ids]
    code_tags = rules.cng.tags_of(m.cng)
    if not nodes:
        diag(DiagnosticCode.UnanalyzedWord, "no candidate segment matches")
        if _looks_secondary(m.lemma, g, rules):
            diag(DiagnosticCode.SecondaryDerivative, "secondary-derivative suffix analysed separately")
        return out

    if len(nodes) > 1:
        infl_codes = {n.cng for n in nodes}
        if m.cng < 0 and m.via is Stage.DerivedStem and len(infl_codes) > 1:
            diag(DiagnosticCode.DerivInflMismatch,
                 f"derivational CNG {m.cng} vs inflectional {', '.join(map(str, sorted(infl_codes)))}")
        if len(infl_codes) == 1 and len({n.morph for n in nodes}) > 1 and len(code_tags) > 1:
            tags = sorted({t for n in nodes for t in n.morph})
            diag(DiagnosticCode.CngManyToOne, f"CNG {m.cng} covers {' / '.join(tags)}")
        merged = [n for n in nodes if n.synthetic is Provenance.compound_merge]
        if len(merged) > 1 and len({_key(n.lemma) for n in merged}) < len(merged):
            diag(DiagnosticCode.MultiCompoundSplit,
                 f"{len(merged)} component splits: {', '.join(str(n.word) for n in merged)}")

    if "ind." in code_tags:
        classes = sorted({t for n in nodes for t in n.morph if t in ("conj.", "prep.")})
        if classes and not any("ind." in n.morph for n in nodes):
            diag(DiagnosticCode.IndeclinableClass, f"gold 'ind.' vs segmenter {' / '.join(classes)}")
    if "iic." in code_tags:
        for n in nodes:
            pfp = [t for t in n.morph if "pfp." in t.split() and "iic." in t.split()]
            if pfp:
                diag(DiagnosticCode.IicPfpMismatch, f"gold 'iic.' vs segmenter {pfp[0]!r}")
                break
    return out


def _looks_secondary(lemma: PhonemeString, g: SegGraph, rules: RuleSet) -> bool:
    want = _key(lemma)
    if want in rules.taddhita:
        return True
    stems = {want}
    if want and want[-1] == "n":
        stems.add(want[:-1])
    for n in g:
        have = _key(n.lemma)
        for stem in stems:
            if len(have) > len(stem) and have[:len(stem)] == stem and have[len(stem):] in rules.taddhita:
                return True
    return False


# ---------------------------------------------------------------- driver

def _apply_modifications(g: SegGraph, rec: DcsSentence, rules: RuleSet, unmatched, order,
                         max_components: int, diagnostics: list) -> SegGraph:
    for name in order:
        if name == "causative":
            g = modify_causative(g, rec, rules.tables, unmatched)
        elif name == "preverb":
            g = modify_preverb_join(g, rules.sandhi, diagnostics)
        elif name == "compound":
            g = modify_compound_merge(g, rec, rules.sandhi, unmatched, max_components, diagnostics)
        else:
            raise ValueError(f"unknown modification {name!r}")
    return g


def align_sentence(rec: DcsSentence, g: SegGraph, rules: RuleSet, *, normalize: bool = True,
                   max_components: int = DEFAULT_MAX_COMPONENTS,
                   order: Sequence[str] = MODIFICATIONS) -> AlignmentResult:
    """Match, modify if some slot is unmatched, re-match the unmatched slots, categorize."""
    if normalize:
        rec = rec.normalized(rules.gemination)
        g = g.normalized(rules.gemination)

    before = match_lemma(rec, g, rules)
    category_before = categorize(before)
    diagnostics: list[Diagnostic] = []
    final = before
    synthesized: tuple[int, ...] = ()

    if category_before in (3, 4):
        unmatched = [m.lemma for m in before if not m.node_ids]
        original_ids = set(g.nodes)
        g = _apply_modifications(g, rec, rules, unmatched, order, max_components, diagnostics)
        synthesized = tuple(i for i in g.nodes if i not in original_ids)
        if synthesized:
            rematched = match_lemma(rec, g, rules)
            rank = {name: i for i, name in enumerate(order)}
            final = []
            for old, new in zip(before, rematched):
                if old.node_ids or not new.node_ids:
                    final.append(old)
                    continue
                provenances = {g.nodes[i].synthetic for i in new.node_ids} - {Provenance.none}
                stage = new.via
                if provenances:
                    first = min(provenances, key=lambda p: rank.get(_PROVENANCE_NAME[p], 99))
                    stage = _PROVENANCE_STAGE[first]
                final.append(replace(new, stage=stage))

    for m in final:
        diagnostics.extend(_slot_diagnostics(m, g, rules))

    return AlignmentResult(
        sent_id=rec.sent_id,
        match_sets=tuple(final),
        category=categorize(final),
        category_before=category_before,
        synthesized=synthesized,
        diagnostics=tuple(sorted(diagnostics)),
        graph=g,
    )


_PROVENANCE_NAME = {
    Provenance.causative: "causative",
    Provenance.preverb_join: "preverb",
    Provenance.compound_merge: "compound",
}
