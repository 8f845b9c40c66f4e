"""Synthetic note corpora and code hierarchies for tests and demos.

Each generated note has a filler preamble and then every configured title
exactly once, in a per-note random order, each followed by a filler body.
Filler draws from pseudo-words plus the words of the multi-word titles,
since real note bodies reuse header vocabulary ("history", "medical").
Single-word titles are kept out of the filler.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .corpus import Document, tokenize
from .labeltree import Hierarchy, hierarchy_from_codes

_ONSETS = ["b", "c", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
           "br", "cl", "dr", "gr", "pl", "st", "tr"]
_VOWELS = ["a", "e", "i", "o", "u", "ai", "ou"]


def pseudo_words(n: int, rng: np.random.Generator, exclude: set[str] = frozenset()) -> list[str]:
    words: list[str] = []
    seen = set(exclude)
    while len(words) < n:
        k = int(rng.integers(2, 4))
        w = "".join(_ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))]
                    for _ in range(k))
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


def filler_vocabulary(titles: Sequence[str], size: int, rng: np.random.Generator) -> list[str]:
    phrases = [tokenize(t) for t in titles]
    single = {p[0] for p in phrases if len(p) == 1}
    title_words = sorted({w for p in phrases if len(p) > 1 for w in p} - single)
    return pseudo_words(size, rng, exclude={w for p in phrases for w in p}) + title_words


def synthetic_codes(n: int, rng: np.random.Generator) -> list[str]:
    """ICD-9 flavoured dotted codes sharing stems, so hierarchies have depth."""
    stems = [f"{int(s):03d}" for s in rng.choice(1000, size=max(2, n // 4), replace=False)]
    codes: set[str] = set()
    while len(codes) < n:
        stem = stems[rng.integers(len(stems))]
        digits = int(rng.integers(0, 3))
        codes.add(stem if digits == 0 else stem + "." + "".join(str(rng.integers(10)) for _ in range(digits)))
    return sorted(codes)


def _render_title(title: str, rng: np.random.Generator) -> str:
    style = rng.integers(3)
    if style == 0:
        return title.upper() + ":"
    if style == 1:
        return title.capitalize() + ":"
    return title.title()


def generate_documents(n_docs: int, titles: Sequence[str], seed: int, vocab_size: int = 2000,
                       body_len: tuple[int, int] = (2, 12), preamble_len: tuple[int, int] = (3, 10),
                       codes: Sequence[str] | None = None,
                       labels_per_doc: tuple[int, int] = (1, 4), title_prob: float = 1.0,
                       repeat_prob: float = 0.0) -> list[Document]:
    """Notes with every title planted once, unless ``title_prob < 1`` drops some.

    ``repeat_prob`` is the chance that a body also mentions some title again,
    which exercises first-occurrence anchoring.
    """
    rng = np.random.default_rng(seed)
    vocab = filler_vocabulary(titles, vocab_size, rng)
    if codes is None:
        codes = synthetic_codes(40, rng)

    def filler(lo: int, hi: int) -> str:
        return " ".join(vocab[i] for i in rng.integers(len(vocab), size=int(rng.integers(lo, hi + 1))))

    docs = []
    for d in range(n_docs):
        parts = [filler(*preamble_len)]
        for t in rng.permutation(len(titles)):
            if title_prob < 1 and rng.random() >= title_prob:
                continue
            body = filler(*body_len)
            if repeat_prob and rng.random() < repeat_prob:
                body += " " + titles[rng.integers(len(titles))] + " " + filler(1, 3)
            parts.append(_render_title(titles[t], rng) + "\n" + body)
        n_labels = int(rng.integers(labels_per_doc[0], labels_per_doc[1] + 1))
        labels = rng.choice(len(codes), size=min(n_labels, len(codes)), replace=False)
        docs.append(Document.from_text(f"note{d:05d}", "\n".join(parts), [codes[i] for i in labels]))
    return docs


def generated_hierarchy(docs: Sequence[Document]) -> Hierarchy:
    codes = set()
    for doc in docs:
        codes.update(doc.labels)
    return hierarchy_from_codes(codes)


def random_titles(n: int, rng: np.random.Generator, max_len: int = 4) -> list[str]:
    words = pseudo_words(n * max_len, rng)
    out, pos = [], 0
    for _ in range(n):
        k = int(rng.integers(1, max_len + 1))
        out.append(" ".join(words[pos:pos + k]))
        pos += k
    return out


def random_hierarchy(n_nodes: int, rng: np.random.Generator) -> Hierarchy:
    """Random recursive tree on nodes "1".."n" rooted at "1"."""
    edges = [(str(i), str(int(rng.integers(1, i)))) for i in range(2, n_nodes + 1)]
    return Hierarchy.from_edges(edges, "1")


def example_hierarchy() -> Hierarchy:
    """The six-node hierarchy fragment of the worked super-tree example."""
    return Hierarchy.from_edges([("2", "1"), ("3", "1"), ("5", "2"), ("6", "3"), ("7", "3")], "1")
