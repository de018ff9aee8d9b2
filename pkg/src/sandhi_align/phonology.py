"""IAST <-> phoneme sequences, normalization and junction sandhi.

Text is kept internally as a :class:`PhonemeString`, a tuple holding one
token per phoneme (``"au"``, ``"kh"`` and ``"ṭh"`` are single tokens).  Two
pseudo-phonemes mark boundaries: ``"-"`` for compound/analysis splits and
``" "`` for word breaks.  Comparison helpers drop them.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

VOWELS = ("a", "ā", "i", "ī", "u", "ū", "ṛ", "ṝ", "ḷ", "ḹ", "e", "ai", "o", "au")

VARGAS = {
    "k": ("k", "kh", "g", "gh", "ṅ"),
    "c": ("c", "ch", "j", "jh", "ñ"),
    "ṭ": ("ṭ", "ṭh", "ḍ", "ḍh", "ṇ"),
    "t": ("t", "th", "d", "dh", "n"),
    "p": ("p", "ph", "b", "bh", "m"),
}
SEMIVOWELS = ("y", "r", "l", "v")
SIBILANTS = ("ś", "ṣ", "s")
ANUSVARA = "ṃ"
VISARGA = "ḥ"
AVAGRAHA = "'"

HYPHEN = "-"
SPACE = " "
BOUNDARIES = frozenset({HYPHEN, SPACE})

STOPS = tuple(p for row in VARGAS.values() for p in row)
CONSONANTS = frozenset(STOPS + SEMIVOWELS + SIBILANTS + ("h",))
VOWEL_SET = frozenset(VOWELS)
PHONEMES = frozenset(VOWELS) | CONSONANTS | {ANUSVARA, VISARGA, AVAGRAHA}

# class nasal for every member of a varga row
_HOMORGANIC_NASAL = {p: row[-1] for row in VARGAS.values() for p in row}

_DIGRAPHS = frozenset(p for p in PHONEMES if len(p) == 2)

# spellings folded into the canonical form before tokenizing
_ALIASES = {
    "ṁ": ANUSVARA,  # dot-above anusvāra
    "’": AVAGRAHA,
    "ʼ": AVAGRAHA,
}


class UnknownSymbol(ValueError):
    """Raised when text contains a character outside the IAST inventory."""

    def __init__(self, position: int, symbol: str, sent_id: int | None = None):
        self.position = position
        self.symbol = symbol
        self.sent_id = sent_id
        where = f" in sentence {sent_id}" if sent_id is not None else ""
        super().__init__(f"unknown symbol {symbol!r} at position {position}{where}")


class MissingRule(LookupError):
    def __init__(self, final: str, initial: str):
        self.final = final
        self.initial = initial
        super().__init__(f"no sandhi rule for {final}+{initial}")


class UnknownPreverb(LookupError):
    def __init__(self, preverb: str):
        self.preverb = preverb
        super().__init__(f"unknown preverb {preverb!r}")


class PhonemeString(tuple):
    """Immutable sequence of phoneme tokens (plus boundary markers)."""

    __slots__ = ()

    def __new__(cls, phonemes: Iterable[str] | str = ()):
        if isinstance(phonemes, str):
            return parse_iast(phonemes)
        items = tuple(phonemes)
        for i, p in enumerate(items):
            if p not in PHONEMES and p not in BOUNDARIES:
                raise UnknownSymbol(i, p)
        return super().__new__(cls, items)

    @classmethod
    def _trusted(cls, items: Iterable[str]) -> "PhonemeString":
        return super().__new__(cls, tuple(items))

    def __getitem__(self, key):
        result = super().__getitem__(key)
        if isinstance(key, slice):
            return PhonemeString._trusted(result)
        return result

    def __add__(self, other):
        return PhonemeString._trusted(tuple(self) + tuple(other))

    def __str__(self) -> str:
        return render_iast(self)

    def __repr__(self) -> str:
        return f"PhonemeString({render_iast(self)!r})"

    def stripped(self) -> "PhonemeString":
        """The same phonemes with boundary markers removed."""
        return PhonemeString._trusted(p for p in self if p not in BOUNDARIES)

    def split(self, marker: str = HYPHEN) -> list["PhonemeString"]:
        parts: list[list[str]] = [[]]
        for p in self:
            if p == marker:
                parts.append([])
            else:
                parts[-1].append(p)
        return [PhonemeString._trusted(part) for part in parts]


def canonical(text: str) -> str:
    """NFC form with alias spellings folded and any whitespace as a single space char."""
    text = unicodedata.normalize("NFC", text)
    out = []
    for ch in text:
        if ch in _ALIASES:
            out.append(_ALIASES[ch])
        elif ch.isspace():
            out.append(SPACE)
        else:
            out.append(ch)
    return "".join(out)


def parse_iast(text: str) -> PhonemeString:
    """Tokenize IAST text, giving digraphs (``ai``, ``kh`` ...) priority.

    Positions in :class:`UnknownSymbol` index the canonical form of ``text``.
    """
    text = canonical(text)
    tokens = []
    i = 0
    while i < len(text):
        pair = text[i:i + 2]
        if pair in _DIGRAPHS:
            tokens.append(pair)
            i += 2
            continue
        ch = text[i]
        if ch in PHONEMES or ch in BOUNDARIES:
            tokens.append(ch)
        else:
            raise UnknownSymbol(i, ch)
        i += 1
    return PhonemeString._trusted(tokens)


def render_iast(ps: Iterable[str]) -> str:
    return "".join(ps)


def is_vowel(p: str) -> bool:
    return p in VOWEL_SET


def normalize_anunasika(ps: PhonemeString) -> PhonemeString:
    """Replace anusvāra before a varga consonant by that varga's nasal."""
    out = list(ps)
    # right to left, so a run like ṃṃb resolves in one pass
    for i in reversed(range(len(out) - 1)):
        if out[i] == ANUSVARA and out[i + 1] in _HOMORGANIC_NASAL:
            out[i] = _HOMORGANIC_NASAL[out[i + 1]]
    return PhonemeString._trusted(out)


DEFAULT_GEMINATION_TRIGGERS = frozenset({"r", "h"})


def normalize_gemination(
    ps: PhonemeString, triggers: Iterable[str] = DEFAULT_GEMINATION_TRIGGERS
) -> PhonemeString:
    """Collapse a doubled consonant written after a trigger (``rmm`` -> ``rm``)."""
    triggers = frozenset(triggers)
    out: list[str] = []
    for p in ps:
        if (
            len(out) >= 2
            and p in CONSONANTS
            and out[-1] == p
            and out[-2] in triggers
        ):
            continue
        out.append(p)
    return PhonemeString._trusted(out)


def normalize(
    ps: PhonemeString, triggers: Iterable[str] = DEFAULT_GEMINATION_TRIGGERS
) -> PhonemeString:
    return normalize_gemination(normalize_anunasika(ps), triggers)


@dataclass(frozen=True)
class Preverb:
    form: PhonemeString
    natva: bool = False
    satva: bool = False


@dataclass(frozen=True)
class SandhiRuleTable:
    vowel_rules: Mapping[tuple[str, str], PhonemeString] = field(default_factory=dict)
    preverbs: Mapping[PhonemeString, Preverb] = field(default_factory=dict)

    def rule(self, final: str, initial: str) -> PhonemeString:
        try:
            return self.vowel_rules[final, initial]
        except KeyError:
            raise MissingRule(final, initial) from None

    def preverb(self, form: PhonemeString) -> Preverb:
        try:
            return self.preverbs[PhonemeString(form)]
        except KeyError:
            raise UnknownPreverb(render_iast(form)) from None


def _data_lines(path: Path):
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].rstrip()
            if line.strip():
                yield lineno, line


def parse_vowel_rules(lines: Iterable[tuple[int, str]]) -> dict:
    rules: dict[tuple[str, str], PhonemeString] = {}
    for lineno, line in lines:
        try:
            lhs, rhs = line.split("=")
            final, initial = (s.strip() for s in lhs.split("+"))
        except ValueError:
            raise ValueError(f"line {lineno}: expected <final>+<initial>=<replacement>") from None
        f_ps, i_ps = parse_iast(final), parse_iast(initial)
        if len(f_ps) != 1 or len(i_ps) != 1 or not is_vowel(f_ps[0]) or not is_vowel(i_ps[0]):
            raise ValueError(f"line {lineno}: rule sides must be single vowels")
        key = (f_ps[0], i_ps[0])
        if key in rules:
            raise ValueError(f"line {lineno}: duplicate rule for {final}+{initial}")
        rules[key] = parse_iast(rhs.strip())
    return rules


def parse_preverbs(lines: Iterable[tuple[int, str]]) -> dict:
    preverbs: dict[PhonemeString, Preverb] = {}
    for lineno, line in lines:
        form, _, flags = line.partition("\t")
        ps = parse_iast(form.strip())
        names = set(flags.replace(",", " ").split())
        unknown = names - {"natva", "satva"}
        if unknown:
            raise ValueError(f"line {lineno}: unknown preverb flag(s) {sorted(unknown)}")
        preverbs[ps] = Preverb(ps, natva="natva" in names, satva="satva" in names)
    return preverbs


def load_sandhi_rules(rule_file: Path, preverb_file: Path) -> SandhiRuleTable:
    return SandhiRuleTable(
        vowel_rules=parse_vowel_rules(_data_lines(Path(rule_file))),
        preverbs=parse_preverbs(_data_lines(Path(preverb_file))),
    )


def load_gemination_triggers(path: Path) -> frozenset:
    triggers = set()
    for lineno, line in _data_lines(Path(path)):
        ps = parse_iast(line.strip())
        if len(ps) != 1 or ps[0] not in CONSONANTS:
            raise ValueError(f"line {lineno}: trigger must be a single consonant")
        triggers.add(ps[0])
    return frozenset(triggers)


def vowel_sandhi_join(
    left: PhonemeString, right: PhonemeString, rules: SandhiRuleTable
) -> PhonemeString:
    """Join two forms, applying the vowel rule at the junction if both sides are vowels there."""
    left, right = PhonemeString(left), PhonemeString(right)
    if not left or not right or not is_vowel(left[-1]) or not is_vowel(right[0]):
        return left + right
    return left[:-1] + rules.rule(left[-1], right[0]) + right[1:]


def _first_syllable_end(stem: PhonemeString) -> int:
    # onset + nucleus + one coda consonant
    for i, p in enumerate(stem):
        if is_vowel(p):
            if i + 1 < len(stem) and stem[i + 1] in CONSONANTS:
                return i + 2
            return i + 1
    return len(stem)


_SATVA_FOLLOWERS = VOWEL_SET | {"t", "th", "m", "y", "v"}


def _retroflex(stem: PhonemeString, pv: Preverb) -> PhonemeString:
    out = list(stem)
    if pv.natva:
        for i in range(_first_syllable_end(stem)):
            if out[i] == "n":
                out[i] = "ṇ"
                break
    if pv.satva and len(out) >= 2 and out[0] == "s" and out[1] in _SATVA_FOLLOWERS:
        out[0] = "ṣ"
    return PhonemeString._trusted(out)


def apply_preverb(
    preverb: PhonemeString, stem: PhonemeString, rules: SandhiRuleTable
) -> PhonemeString:
    """Attach a preverb (or a hyphenated chain like ``sam-ā``) to a verbal stem."""
    result = PhonemeString(stem).stripped()
    for part in reversed(PhonemeString(preverb).split(HYPHEN)):
        pv = rules.preverb(part)
        result = vowel_sandhi_join(pv.form, _retroflex(result, pv), rules)
    return result
