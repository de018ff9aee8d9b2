"""Candidate-segment graphs: one node per segmenter analysis, edges labelled
``1`` (can co-occur) or ``2`` (spans overlap, so the two analyses conflict).
"""

from __future__ import annotations

import enum
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, replace, fields
from itertools import combinations
from pathlib import Path
from typing import Any, Iterable, Mapping, NamedTuple

from .phonology import PhonemeString, parse_iast, normalize, DEFAULT_GEMINATION_TRIGGERS
from .morph_tags import normalize_tag

COMPATIBLE = 1
CONFLICT = 2

GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"


class DuplicateNodeId(ValueError):
    pass


class SpanOutOfRange(ValueError):
    pass


class MalformedDocument(ValueError):
    pass


class MissingAttribute(MalformedDocument):
    def __init__(self, name: str, node_id: Any = None):
        self.name = name
        self.node_id = node_id
        where = f" on node {node_id}" if node_id is not None else ""
        super().__init__(f"missing attribute {name!r}{where}")


class Span(NamedTuple):
    start: int
    end: int

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end


class Provenance(str, enum.Enum):
    none = "none"
    causative = "causative"
    preverb_join = "preverb_join"
    compound_merge = "compound_merge"


def _ps_or_none(value) -> PhonemeString | None:
    if value is None:
        return None
    ps = PhonemeString(value)
    return ps or None


@dataclass(frozen=True)
class CandidateSegment:
    id: int
    word: PhonemeString
    lemma: PhonemeString
    cng: int
    char_pos: Span
    color_class: str = "Noun"
    position: int = 0
    chunk_no: int = 0
    sense: frozenset = frozenset()
    pre_verb: PhonemeString | None = None
    morph: frozenset = frozenset()
    length_word: int = -1
    der_pre_verb: PhonemeString | None = None
    der_lemma: PhonemeString | None = None
    der_sense: frozenset = frozenset()
    der_morph: frozenset = frozenset()
    der_cng: int | None = None
    synthetic: Provenance = Provenance.none

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "word", PhonemeString(self.word))
        set_(self, "lemma", PhonemeString(self.lemma))
        set_(self, "char_pos", Span(*self.char_pos))
        set_(self, "sense", frozenset(int(s) for s in self.sense))
        set_(self, "der_sense", frozenset(int(s) for s in self.der_sense))
        set_(self, "morph", frozenset(normalize_tag(t) for t in self.morph))
        set_(self, "der_morph", frozenset(normalize_tag(t) for t in self.der_morph))
        for name in ("pre_verb", "der_pre_verb", "der_lemma"):
            set_(self, name, _ps_or_none(getattr(self, name)))
        set_(self, "synthetic", Provenance(self.synthetic))
        if self.char_pos.start >= self.char_pos.end or self.char_pos.start < 0:
            raise ValueError(f"node {self.id}: char_pos {tuple(self.char_pos)} is not a non-empty interval")
        expected = len(self.word.stripped())
        if self.length_word == -1:
            set_(self, "length_word", expected)
        elif self.length_word != expected:
            raise ValueError(f"node {self.id}: length_word {self.length_word} != {expected} phonemes in word")

    @property
    def is_iic(self) -> bool:
        return any(t.split()[-1] == "iic." for t in self.morph if t)

    def normalized(self, triggers=DEFAULT_GEMINATION_TRIGGERS) -> "CandidateSegment":
        def norm(ps):
            return None if ps is None else normalize(ps, triggers)
        return replace(
            self,
            word=norm(self.word),
            lemma=norm(self.lemma),
            pre_verb=norm(self.pre_verb),
            der_pre_verb=norm(self.der_pre_verb),
            der_lemma=norm(self.der_lemma),
            length_word=-1,
        )

    def content_key(self) -> tuple:
        """Everything but the id; used to avoid inserting duplicate synthetic nodes."""
        return tuple(getattr(self, f.name) for f in fields(self) if f.name != "id")

    def to_json(self) -> dict:
        def s(ps):
            return None if ps is None else str(ps)
        return {
            "id": self.id,
            "color_class": self.color_class,
            "position": self.position,
            "chunk_no": self.chunk_no,
            "word": str(self.word),
            "lemma": str(self.lemma),
            "sense": sorted(self.sense),
            "cng": self.cng,
            "pre_verb": s(self.pre_verb),
            "morph": sorted(self.morph),
            "length_word": self.length_word,
            "der_pre_verb": s(self.der_pre_verb),
            "der_lemma": s(self.der_lemma),
            "der_sense": sorted(self.der_sense),
            "der_morph": sorted(self.der_morph),
            "der_cng": self.der_cng,
            "char_pos": list(self.char_pos),
            "synthetic": self.synthetic.value,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "CandidateSegment":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown segment field(s): {', '.join(sorted(unknown))}")
        for name in ("id", "word", "lemma", "cng", "char_pos"):
            if obj.get(name) is None:
                raise ValueError(f"segment is missing {name!r}")
        kwargs = {k: v for k, v in obj.items() if v is not None}
        for name in ("sense", "der_sense", "morph", "der_morph"):
            if name in kwargs:
                kwargs[name] = frozenset(kwargs[name])
        return cls(**kwargs)


def edge_label(a: CandidateSegment, b: CandidateSegment) -> int:
    return CONFLICT if a.char_pos.overlaps(b.char_pos) else COMPATIBLE


class SegGraph:
    """Immutable node/edge container; transformations return new graphs."""

    __slots__ = ("_nodes", "_edges")

    def __init__(self, nodes: Mapping[int, CandidateSegment] | None = None,
                 edges: Mapping[tuple[int, int], int] | None = None):
        self._nodes = dict(sorted((nodes or {}).items()))
        self._edges = dict(sorted((edges or {}).items()))

    @property
    def nodes(self) -> Mapping[int, CandidateSegment]:
        return self._nodes

    @property
    def edges(self) -> Mapping[tuple[int, int], int]:
        return self._edges

    def __iter__(self):
        return iter(self._nodes.values())

    def __len__(self):
        return len(self._nodes)

    def __eq__(self, other):
        if not isinstance(other, SegGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._edges == other._edges

    def __repr__(self):
        return f"SegGraph({len(self._nodes)} nodes, {len(self._edges)} edges)"

    def label(self, a: int, b: int) -> int:
        return self._edges[(a, b) if a < b else (b, a)]

    def next_id(self) -> int:
        return max(self._nodes, default=-1) + 1

    def normalized(self, triggers=DEFAULT_GEMINATION_TRIGGERS) -> "SegGraph":
        return SegGraph({i: n.normalized(triggers) for i, n in self._nodes.items()}, self._edges)


def build_graph(segments: Iterable[CandidateSegment], sentence_length: int | None = None) -> SegGraph:
    """Graph over ``segments`` with a labelled edge for every unordered pair."""
    nodes: dict[int, CandidateSegment] = {}
    for seg in segments:
        if seg.id in nodes:
            raise DuplicateNodeId(f"duplicate node id {seg.id}")
        if sentence_length is not None and seg.char_pos.end > sentence_length:
            raise SpanOutOfRange(
                f"node {seg.id}: char_pos {tuple(seg.char_pos)} exceeds sentence length {sentence_length}"
            )
        nodes[seg.id] = seg
    ordered = sorted(nodes.values(), key=lambda n: n.id)
    edges = {(a.id, b.id): edge_label(a, b) for a, b in combinations(ordered, 2)}
    return SegGraph(nodes, edges)


def _inflectional_key(n: CandidateSegment) -> tuple:
    return (n.color_class, n.position, n.chunk_no, n.word, n.lemma, n.cng,
            n.pre_verb, n.morph, n.char_pos, n.synthetic)


def _derivational_key(n: CandidateSegment) -> tuple:
    return (n.der_pre_verb, n.der_lemma, n.der_morph, n.der_cng)


def merge_homonyms(g: SegGraph) -> SegGraph:
    """Collapse analyses that differ only by homonymy index into one node.

    Nodes agreeing on every inflectional and derivational field are merged,
    pooling ``sense`` and ``der_sense``.  Nodes that also differ in their
    derivation (``hita_1`` from ``hi`` vs ``hita_2`` from ``dhā``) are merged
    only when each carries its own disjoint sense; the merged node then
    drops the conflicting derivational fields.
    """
    groups: dict[tuple, list[CandidateSegment]] = {}
    for n in g:
        groups.setdefault(_inflectional_key(n), []).append(n)

    merged: list[CandidateSegment] = []
    for members in groups.values():
        by_der: dict[tuple, list[CandidateSegment]] = {}
        for n in members:
            by_der.setdefault(_derivational_key(n), []).append(n)
        variants = [
            replace(
                min(vs, key=lambda n: n.id),
                sense=frozenset().union(*(v.sense for v in vs)),
                der_sense=frozenset().union(*(v.der_sense for v in vs)),
            )
            for vs in by_der.values()
        ]
        if len(variants) > 1 and _distinct_homonyms(variants):
            head = min(variants, key=lambda n: n.id)
            variants = [replace(
                head,
                sense=frozenset().union(*(v.sense for v in variants)),
                der_pre_verb=None, der_lemma=None, der_sense=frozenset(),
                der_morph=frozenset(), der_cng=None,
            )]
        merged.extend(variants)
    return build_graph(merged)


def _distinct_homonyms(variants: list[CandidateSegment]) -> bool:
    seen: set[int] = set()
    for v in variants:
        if not v.sense or v.sense & seen:
            return False
        seen |= v.sense
    return True


def add_synthetic_node(g: SegGraph, node: CandidateSegment) -> SegGraph:
    if node.synthetic is Provenance.none:
        raise ValueError(f"node {node.id} is not marked synthetic")
    if node.id in g.nodes:
        raise DuplicateNodeId(f"duplicate node id {node.id}")
    nodes = dict(g.nodes)
    edges = dict(g.edges)
    for other in g:
        key = (other.id, node.id) if other.id < node.id else (node.id, other.id)
        edges[key] = edge_label(other, node)
    nodes[node.id] = node
    return SegGraph(nodes, edges)


# ---------------------------------------------------------------- analyses I/O

def read_analyses(path: Path) -> dict[int, list[CandidateSegment]]:
    """Load ``analyses.jsonl``: ``{"sent_id": N, "segments": [...]}`` per line."""
    out: dict[int, list[CandidateSegment]] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                sent_id = obj["sent_id"]
                segs = [CandidateSegment.from_json(s) for s in obj["segments"]]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad analyses record: {exc}") from exc
            if sent_id in out:
                raise ValueError(f"{path}:{lineno}: duplicate sent_id {sent_id}")
            out[sent_id] = segs
    return out


# ---------------------------------------------------------------- GraphML

# (attribute, graphml type, required)
_NODE_KEYS = (
    ("color_class", "string", True),
    ("position", "int", True),
    ("chunk_no", "int", True),
    ("word", "string", True),
    ("lemma", "string", True),
    ("sense", "string", True),
    ("cng", "int", True),
    ("pre_verb", "string", False),
    ("morph", "string", True),
    ("length_word", "int", True),
    ("der_pre_verb", "string", False),
    ("der_lemma", "string", False),
    ("der_sense", "string", False),
    ("der_morph", "string", False),
    ("der_cng", "int", False),
    ("char_pos", "string", True),
    ("synthetic", "string", False),
)

_KEY_NAMES = frozenset(name for name, _, _ in _NODE_KEYS)
_SET_KEYS = {"sense", "der_sense", "morph", "der_morph"}
_PS_KEYS = {"word", "lemma", "pre_verb", "der_pre_verb", "der_lemma"}


def _encode(name: str, value) -> str | None:
    if value is None:
        return None
    if name in _SET_KEYS:
        if not value and name.startswith("der_"):
            return None
        return json.dumps(sorted(value), ensure_ascii=False)
    if name == "char_pos":
        return json.dumps(list(value))
    if name == "synthetic":
        return None if value is Provenance.none else value.value
    return str(value)


def _decode(name: str, text: str):
    try:
        if name in _SET_KEYS:
            return frozenset(json.loads(text))
        if name == "char_pos":
            start, end = json.loads(text)
            return Span(int(start), int(end))
        if name in _PS_KEYS:
            return parse_iast(text)
        if name in ("position", "chunk_no", "cng", "length_word", "der_cng"):
            return int(text)
    except (ValueError, TypeError) as exc:
        raise MalformedDocument(f"bad value for {name!r}: {text!r}") from exc
    return text


def write_graphml(g: SegGraph, graph_id: str = "G") -> str:
    ET.register_namespace("", GRAPHML_NS)
    root = ET.Element(f"{{{GRAPHML_NS}}}graphml")
    for name, typ, _ in _NODE_KEYS:
        ET.SubElement(root, f"{{{GRAPHML_NS}}}key", {
            "id": name, "for": "node", "attr.name": name, "attr.type": typ,
        })
    graph = ET.SubElement(root, f"{{{GRAPHML_NS}}}graph", {"id": graph_id, "edgedefault": "undirected"})
    for n in g:
        el = ET.SubElement(graph, f"{{{GRAPHML_NS}}}node", {"id": str(n.id)})
        for name, _, _ in _NODE_KEYS:
            text = _encode(name, getattr(n, name))
            if text is not None:
                ET.SubElement(el, f"{{{GRAPHML_NS}}}data", {"key": name}).text = text
    for (a, b), label in g.edges.items():
        ET.SubElement(graph, f"{{{GRAPHML_NS}}}edge", {
            "source": str(a), "target": str(b), "label": str(label),
        })
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def read_graphml(doc: str | bytes) -> SegGraph:
    try:
        root = ET.fromstring(doc)
    except ET.ParseError as exc:
        raise MalformedDocument(f"not well-formed XML: {exc}") from exc

    def q(tag):
        return f"{{{GRAPHML_NS}}}{tag}"

    if root.tag != q("graphml"):
        raise MalformedDocument(f"root element is {root.tag!r}, expected graphml")
    key_names = {k.get("id"): k.get("attr.name", k.get("id")) for k in root.findall(q("key"))}
    graph = root.find(q("graph"))
    if graph is None:
        raise MalformedDocument("no <graph> element")

    nodes: dict[int, CandidateSegment] = {}
    for el in graph.findall(q("node")):
        try:
            node_id = int(el.get("id"))
        except (TypeError, ValueError):
            raise MalformedDocument(f"node id {el.get('id')!r} is not an integer") from None
        values: dict[str, Any] = {}
        for d in el.findall(q("data")):
            name = key_names.get(d.get("key"), d.get("key"))
            values[name] = _decode(name, d.text or "")
        for name, _, required in _NODE_KEYS:
            if required and name not in values:
                raise MissingAttribute(name, node_id)
        try:
            node = CandidateSegment(id=node_id, **{k: v for k, v in values.items() if k in _KEY_NAMES})
        except ValueError as exc:
            raise MalformedDocument(str(exc)) from exc
        if node_id in nodes:
            raise MalformedDocument(f"duplicate node id {node_id}")
        nodes[node_id] = node

    edges: dict[tuple[int, int], int] = {}
    for el in graph.findall(q("edge")):
        try:
            a, b = int(el.get("source")), int(el.get("target"))
        except (TypeError, ValueError):
            raise MalformedDocument("edge endpoints must be integer node ids") from None
        if a not in nodes or b not in nodes:
            raise MalformedDocument(f"edge ({a}, {b}) references an unknown node")
        label = el.get("label")
        if label not in ("1", "2"):
            raise MissingAttribute("label") if label is None else MalformedDocument(f"edge label {label!r}")
        edges[(a, b) if a < b else (b, a)] = int(label)
    return SegGraph(nodes, edges)
