"""Document store: tokenization and line-delimited corpus loading."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Sequence

Token = str

# Letters and digits only; everything else (including ':' and '_') separates tokens.
_TOKEN_RE = re.compile(r"[^\W_]+")


class CorpusError(ValueError):
    """Raised for malformed corpus files or inconsistent corpora."""


def tokenize(text: str) -> list[Token]:
    """Lowercase ``text`` and split it into word tokens.

    Whitespace and punctuation are separators, so a trailing colon on a
    header ("Course:") disappears while the word itself is kept.

    >>> tokenize("Brief Hospital Course:")
    ['brief', 'hospital', 'course']
    """
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Document:
    id: str
    raw_text: str
    tokens: tuple[Token, ...]
    labels: frozenset[str] = frozenset()

    @classmethod
    def from_text(cls, id: str, text: str, labels: Iterable[str] = ()) -> "Document":
        return cls(id=id, raw_text=text, tokens=tuple(tokenize(text)), labels=frozenset(labels))


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...] = field(default_factory=tuple)

    def __post_init__(self):
        seen = set()
        for doc in self.documents:
            if doc.id in seen:
                raise CorpusError(f"duplicate id {doc.id}")
            seen.add(doc.id)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def __getitem__(self, i: int) -> Document:
        return self.documents[i]

    @cached_property
    def vocabulary(self) -> frozenset[Token]:
        vocab: set[Token] = set()
        for doc in self.documents:
            vocab.update(doc.tokens)
        return frozenset(vocab)

    @cached_property
    def by_id(self) -> dict[str, Document]:
        return {doc.id: doc for doc in self.documents}


def iter_records(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield ``(line_number, record)`` for each JSON line in ``path``.

    Blank lines and ``#`` header lines are skipped; line numbers are 1-based
    physical line numbers so errors point at the right place.
    """
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            try:
                record = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(record, dict):
                raise CorpusError(f"line {lineno}: expected a JSON object")
            yield lineno, record


def _parse_labels(value, lineno: int) -> frozenset[str]:
    if value is None:
        return frozenset()
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise CorpusError(f"line {lineno}: 'labels' must be a list of strings")
    return frozenset(value)


def load_corpus(path: str | Path) -> Corpus:
    docs: list[Document] = []
    seen: set[str] = set()
    for lineno, record in iter_records(path):
        for key in ("id", "text"):
            if key not in record:
                raise CorpusError(f"line {lineno}: missing field '{key}'")
            if not isinstance(record[key], str):
                raise CorpusError(f"line {lineno}: field '{key}' must be a string")
        doc_id = record["id"]
        if doc_id in seen:
            raise CorpusError(f"duplicate id {doc_id} at line {lineno}")
        seen.add(doc_id)
        docs.append(Document.from_text(doc_id, record["text"], _parse_labels(record.get("labels"), lineno)))
    return Corpus(tuple(docs))


def write_corpus(documents: Sequence[Document], fh) -> None:
    """Write documents as JSON lines to an open text stream."""
    for doc in documents:
        record = {"id": doc.id, "text": doc.raw_text, "labels": sorted(doc.labels)}
        fh.write(json.dumps(record, ensure_ascii=False) + "\n")
