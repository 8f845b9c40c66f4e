"""Split notes into a preamble plus titled sections anchored on first title occurrences."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .corpus import CorpusError, Document, iter_records, tokenize
from .titler import Phrase, is_strict_subphrase

# Top-20 DF-IAPF titles followed by ranks 23, 28, 29 of the MIMIC-III extraction.
DEFAULT_TITLES: tuple[str, ...] = (
    "history of present illness",
    "date of birth",
    "sex",
    "discharge date",
    "admission date",
    "social history",
    "past medical history",
    "discharge medications",
    "medications on admission",
    "discharge diagnosis",
    "discharge condition",
    "discharge instructions",
    "major surgical or invasive procedure",
    "brief hospital course",
    "pertinent results",
    "followup instructions",
    "family history",
    "chief complaint",
    "attending",
    "physical exam",
    "service",
    "discharge disposition",
    "allergies",
)

# Demographic / administrative sections left out of contrastive pre-training.
DEFAULT_INELIGIBLE: frozenset[str] = frozenset({
    "date of birth", "sex", "admission date", "discharge date", "attending", "service",
})


class TitleSetError(ValueError):
    pass


class SegmentationIntegrityError(RuntimeError):
    """Reassembled tokens differ from the source document."""


@dataclass(frozen=True)
class TitleSet:
    titles: tuple[Phrase, ...]
    ineligible: frozenset[Phrase] = frozenset()

    def __post_init__(self):
        if not self.titles:
            raise TitleSetError("title set is empty")
        if any(not t for t in self.titles):
            raise TitleSetError("title with no tokens")
        if len(set(self.titles)) != len(self.titles):
            raise TitleSetError("duplicate titles")
        for a in self.titles:
            for b in self.titles:
                if is_strict_subphrase(a, b):
                    raise TitleSetError(f"title '{' '.join(a)}' is contained in '{' '.join(b)}'")
        unknown = self.ineligible - set(self.titles)
        if unknown:
            raise TitleSetError(f"ineligible titles not in set: {sorted(' '.join(t) for t in unknown)}")

    @classmethod
    def from_strings(cls, titles: Iterable[str], ineligible: Iterable[str] = ()) -> "TitleSet":
        return cls(tuple(tuple(tokenize(t)) for t in titles),
                   frozenset(tuple(tokenize(t)) for t in ineligible))

    @classmethod
    def default(cls) -> "TitleSet":
        return cls.from_strings(DEFAULT_TITLES, DEFAULT_INELIGIBLE)

    def __len__(self) -> int:
        return len(self.titles)

    def is_eligible(self, title: Phrase) -> bool:
        return title in self.titles and title not in self.ineligible

    @property
    def eligible(self) -> tuple[Phrase, ...]:
        return tuple(t for t in self.titles if t not in self.ineligible)


def load_titles(path: str | Path) -> TitleSet:
    """Read a titles file: one title per line, ``!`` marks contrastive-ineligible.

    Anything after a tab is ignored, so an edited ``extract-titles`` output
    file can be used directly.
    """
    titles, ineligible = [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("\t", 1)[0].strip()
            if not line or line.startswith("#"):
                continue
            flagged = line.startswith("!")
            phrase = tuple(tokenize(line[1:] if flagged else line))
            if not phrase:
                continue
            titles.append(phrase)
            if flagged:
                ineligible.append(phrase)
    return TitleSet(tuple(titles), frozenset(ineligible))


def format_titles(titles: TitleSet) -> str:
    return "".join(("!" if t in titles.ineligible else "") + " ".join(t) + "\n" for t in titles.titles)


@dataclass(frozen=True)
class Section:
    title: Phrase
    start: int       # index of the first title token
    body_start: int
    body_end: int

    @property
    def body_range(self) -> range:
        return range(self.body_start, self.body_end)


@dataclass(frozen=True)
class SectionedDocument:
    doc_id: str
    tokens: tuple[str, ...]
    preamble_end: int
    sections: tuple[Section, ...] = ()
    labels: frozenset[str] = field(default_factory=frozenset)

    @property
    def source_len(self) -> int:
        return len(self.tokens)

    @property
    def preamble(self) -> tuple[str, ...]:
        return self.tokens[:self.preamble_end]

    def body(self, section: Section) -> tuple[str, ...]:
        return self.tokens[section.body_start:section.body_end]

    def section_tokens(self, section: Section) -> tuple[str, ...]:
        """Title followed by body."""
        return self.tokens[section.start:section.body_end]

    def bodies(self) -> dict[Phrase, tuple[str, ...]]:
        return {s.title: self.body(s) for s in self.sections}

    def to_record(self) -> dict:
        return {
            "id": self.doc_id,
            "labels": sorted(self.labels),
            "preamble": list(self.preamble),
            "sections": [{"title": " ".join(s.title), "body": list(self.body(s))}
                         for s in self.sections],
        }

    @classmethod
    def from_record(cls, record: dict) -> "SectionedDocument":
        tokens = list(record["preamble"])
        preamble_end = len(tokens)
        sections = []
        for sec in record["sections"]:
            title = tuple(sec["title"].split())
            start = len(tokens)
            tokens.extend(title)
            body_start = len(tokens)
            tokens.extend(sec["body"])
            sections.append(Section(title, start, body_start, len(tokens)))
        return cls(record["id"], tuple(tokens), preamble_end, tuple(sections),
                   frozenset(record.get("labels") or ()))


def find_anchors(tokens: Sequence[str], titles: TitleSet) -> list[tuple[Phrase, int]]:
    """First occurrence of each title, scanning left to right.

    At one position the longest matching title wins. Positions covered by an
    accepted anchor are skipped, so anchors never overlap even when two
    titles share a boundary word.
    """
    by_first: dict[str, list[Phrase]] = {}
    for t in sorted(titles.titles, key=lambda t: (-len(t), t)):
        by_first.setdefault(t[0], []).append(t)
    anchors: list[tuple[Phrase, int]] = []
    found: set[Phrase] = set()
    i, n = 0, len(tokens)
    while i < n and len(found) < len(titles):
        hit = None
        for t in by_first.get(tokens[i], ()):
            if t not in found and tuple(tokens[i:i + len(t)]) == t:
                hit = t
                break
        if hit is None:
            i += 1
            continue
        anchors.append((hit, i))
        found.add(hit)
        i += len(hit)
    return anchors


def segment(doc: Document, titles: TitleSet) -> SectionedDocument:
    tokens = tuple(doc.tokens)
    anchors = find_anchors(tokens, titles)
    if not anchors:
        return SectionedDocument(doc.id, tokens, len(tokens), (), doc.labels)
    sections = []
    for idx, (title, start) in enumerate(anchors):
        end = anchors[idx + 1][1] if idx + 1 < len(anchors) else len(tokens)
        sections.append(Section(title, start, start + len(title), end))
    return SectionedDocument(doc.id, tokens, anchors[0][1], tuple(sections), doc.labels)


def reassemble(sd: SectionedDocument, doc: Document | None = None) -> tuple[str, ...]:
    """Rebuild the token stream as preamble + (title + body) per section."""
    out = list(sd.preamble)
    for s in sd.sections:
        out.extend(s.title)
        out.extend(sd.body(s))
    out = tuple(out)
    expected = sd.tokens if doc is None else tuple(doc.tokens)
    if out != expected:
        raise SegmentationIntegrityError(f"reassembled tokens differ from source for {sd.doc_id}")
    return out


def load_segmented(path: str | Path) -> list[SectionedDocument]:
    docs = []
    seen = set()
    for lineno, record in iter_records(path):
        try:
            sd = SectionedDocument.from_record(record)
        except (KeyError, TypeError, AttributeError) as exc:
            raise CorpusError(f"line {lineno}: malformed segmented record ({exc})") from None
        if sd.doc_id in seen:
            raise CorpusError(f"duplicate id {sd.doc_id} at line {lineno}")
        seen.add(sd.doc_id)
        docs.append(sd)
    return docs


def iter_segmented_lines(docs: Iterable[SectionedDocument]) -> Iterator[str]:
    for sd in docs:
        yield json.dumps(sd.to_record(), ensure_ascii=False) + "\n"
