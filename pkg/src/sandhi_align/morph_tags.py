"""Morphological tags and their many-to-many mapping to integer CNG codes."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Iterable


def normalize_tag(tag: str) -> str:
    """Space tags uniformly: ``"n.sg.acc."`` and ``"n. sg.  acc."`` both become ``"n. sg. acc."``."""
    return " ".join(tag.replace(".", ". ").split())


def is_derivational(code: int) -> bool:
    return code < 0


class CngTable:
    """Tag <-> code relation, stored as two multimaps kept in sync."""

    def __init__(self, pairs: Iterable[tuple[str, int]] = (), extended: Iterable[tuple[str, int]] = ()):
        self._codes: dict[str, set[int]] = defaultdict(set)
        self._tags: dict[int, set[str]] = defaultdict(set)
        self.extended: set[tuple[str, int]] = set()
        for tag, code in pairs:
            self.add(tag, code)
        for tag, code in extended:
            self.add(tag, code, extended=True)

    def add(self, tag: str, code: int, extended: bool = False) -> None:
        tag = normalize_tag(tag)
        if not tag:
            raise ValueError("empty morphological tag")
        self._codes[tag].add(int(code))
        self._tags[int(code)].add(tag)
        if extended:
            self.extended.add((tag, int(code)))

    def codes_of(self, tag: str) -> frozenset[int]:
        return frozenset(self._codes.get(normalize_tag(tag), ()))

    def tags_of(self, code: int) -> frozenset[str]:
        return frozenset(self._tags.get(code, ()))

    def codes_of_any(self, tags: Iterable[str]) -> frozenset[int]:
        out: set[int] = set()
        for t in tags:
            out |= self._codes.get(normalize_tag(t), set())
        return frozenset(out)

    @property
    def tags(self) -> frozenset[str]:
        return frozenset(self._codes)

    @property
    def codes(self) -> frozenset[int]:
        return frozenset(self._tags)

    def pairs(self) -> set[tuple[str, int]]:
        return {(t, c) for t, cs in self._codes.items() for c in cs}

    @classmethod
    def load(cls, path: Path) -> "CngTable":
        table = cls()
        with open(path, encoding="utf-8") as f:
            for lineno, raw in enumerate(f, 1):
                line, _, comment = raw.rstrip("\n").partition("#")
                if not line.strip():
                    continue
                fields = [x.strip() for x in line.split("\t") if x.strip()]
                if len(fields) != 2:
                    raise ValueError(f"{path}:{lineno}: expected tag<TAB>code")
                try:
                    code = int(fields[1])
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: code {fields[1]!r} is not an integer") from None
                table.add(fields[0], code, extended=comment.strip().startswith("extended"))
        return table
