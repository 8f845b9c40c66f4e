"""Contrastive section quadruples and the soft-similarity MAE loss.

A quadruple is (s_k^i, s_k'^i, s_k^j, s_k'^j): two sections of note i and
the same two titles in another note j. Pairs inside one note are pushed
towards cosine 1, the two cross-note pairs towards alpha(labels_i, labels_j).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .segmenter import SectionedDocument, TitleSet
from .titler import Phrase

DEFAULT_MAX_RETRIES = 100

Similarity = Callable[[Iterable[str], Iterable[str]], float]


class QuadrupleSamplingError(ValueError):
    pass


@dataclass(frozen=True)
class Quadruple:
    note_i: str
    note_j: str
    title_k: Phrase
    title_k2: Phrase
    s_ki: tuple[str, ...]
    s_k2i: tuple[str, ...]
    s_kj: tuple[str, ...]
    s_k2j: tuple[str, ...]
    alpha: float

    def to_json(self) -> str:
        head = json.dumps({"note_i": self.note_i, "note_j": self.note_j,
                           "title_k": " ".join(self.title_k), "title_k2": " ".join(self.title_k2)},
                          ensure_ascii=False)
        tail = json.dumps({"s_ki": list(self.s_ki), "s_k2i": list(self.s_k2i),
                           "s_kj": list(self.s_kj), "s_k2j": list(self.s_k2j)},
                          ensure_ascii=False)
        # alpha is written with exactly six decimals
        return f'{head[:-1]}, "alpha": {self.alpha:.6f}, {tail[1:]}'


def _eligible_bodies(sd: SectionedDocument, titles: TitleSet) -> dict[Phrase, tuple[str, ...]]:
    return {s.title: sd.body(s) for s in sd.sections
            if titles.is_eligible(s.title) and s.body_end > s.body_start}


class QuadrupleSampler:
    """Seeded quadruple stream over a sectioned, labelled corpus.

    Draw order per quadruple: note i, first title, second title, note j;
    an infeasible (i, k, k') with no partner note is redrawn up to
    ``max_retries`` times. ``strict=True`` instead draws only from feasible
    configurations, enumerated up front.
    """

    def __init__(self, notes: Sequence[SectionedDocument], titles: TitleSet,
                 similarity: Similarity, seed: int,
                 max_retries: int = DEFAULT_MAX_RETRIES, strict: bool = False):
        if len(notes) < 2:
            raise QuadrupleSamplingError("need at least 2 notes")
        for sd in notes:
            if not sd.labels:
                raise QuadrupleSamplingError(f"note {sd.doc_id} has no labels")
        self.notes = list(notes)
        self.similarity = similarity
        self.max_retries = max_retries
        self.strict = strict
        self.rng = np.random.default_rng(seed)
        # titles in title-set order so draws are reproducible
        order = {t: n for n, t in enumerate(titles.titles)}
        self.bodies = [_eligible_bodies(sd, titles) for sd in self.notes]
        self.note_titles = [sorted(b, key=order.__getitem__) for b in self.bodies]
        self.holders: dict[Phrase, set[int]] = {}
        for idx, b in enumerate(self.bodies):
            for t in b:
                self.holders.setdefault(t, set()).add(idx)
        self.anchor_notes = [i for i, ts in enumerate(self.note_titles) if len(ts) >= 2]
        if not self.anchor_notes:
            raise QuadrupleSamplingError("no note has two non-empty eligible sections")
        self._partner_cache: dict[tuple[Phrase, Phrase], list[int]] = {}
        if strict:
            self._feasible = {}
            for i in self.anchor_notes:
                ts = self.note_titles[i]
                pairs = [(a, b) for a in ts for b in ts if a != b and self._partners(i, a, b)]
                if pairs:
                    self._feasible[i] = pairs
            if not self._feasible:
                raise QuadrupleSamplingError(
                    "no feasible configuration: no two notes share two non-empty eligible sections")
            self._feasible_notes = sorted(self._feasible)

    def _partners(self, i: int, a: Phrase, b: Phrase) -> list[int]:
        key = (a, b) if a <= b else (b, a)
        if key not in self._partner_cache:
            self._partner_cache[key] = sorted(self.holders.get(a, set()) & self.holders.get(b, set()))
        return [j for j in self._partner_cache[key] if j != i]

    def _draw_config(self) -> tuple[int, Phrase, Phrase, list[int]]:
        rng = self.rng
        if self.strict:
            i = self._feasible_notes[rng.integers(len(self._feasible_notes))]
            pairs = self._feasible[i]
            a, b = pairs[rng.integers(len(pairs))]
            return i, a, b, self._partners(i, a, b)
        for _ in range(self.max_retries):
            i = self.anchor_notes[rng.integers(len(self.anchor_notes))]
            ts = self.note_titles[i]
            x = rng.integers(len(ts))
            y = rng.integers(len(ts) - 1)
            if y >= x:
                y += 1
            a, b = ts[x], ts[y]
            partners = self._partners(i, a, b)
            if partners:
                return i, a, b, partners
        raise QuadrupleSamplingError(
            f"no partner note found after {self.max_retries} draws; "
            "too few notes share two non-empty eligible sections (try strict mode)")

    def draw(self) -> Quadruple:
        i, a, b, partners = self._draw_config()
        j = partners[self.rng.integers(len(partners))]
        ni, nj = self.notes[i], self.notes[j]
        alpha = self.similarity(ni.labels, nj.labels)
        bi, bj = self.bodies[i], self.bodies[j]
        return Quadruple(ni.doc_id, nj.doc_id, a, b, bi[a], bi[b], bj[a], bj[b], alpha)

    def __iter__(self) -> Iterator[Quadruple]:
        while True:
            yield self.draw()


def sample_quadruples(notes: Sequence[SectionedDocument], titles: TitleSet, similarity: Similarity,
                      count: int, seed: int, max_retries: int = DEFAULT_MAX_RETRIES,
                      strict: bool = False) -> Iterator[Quadruple]:
    sampler = QuadrupleSampler(notes, titles, similarity, seed, max_retries, strict)
    for _ in range(count):
        yield sampler.draw()


def max_pool(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] < 1:
        raise ValueError("embedding matrix must be 2-D with at least one row")
    if not np.all(np.isfinite(m)):
        raise ValueError("embedding matrix has non-finite entries")
    return m.max(axis=0)


def cosine(u, v) -> float:
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("cosine undefined for a zero vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def contrastive_loss(s_ki, s_k2i, s_kj, s_k2j, alpha: float) -> float:
    if not -1 <= alpha <= 1:
        raise ValueError("alpha must lie in [-1, 1]")
    return (abs(1 - cosine(s_ki, s_k2i)) + abs(alpha - cosine(s_ki, s_kj))
            + abs(1 - cosine(s_kj, s_k2j)) + abs(alpha - cosine(s_k2i, s_k2j)))


def hashed_token_embeddings(tokens: Sequence[str], dim: int = 16, salt: str = "") -> np.ndarray:
    """Deterministic stand-in encoder: each token maps to a fixed Gaussian vector."""
    rows = []
    for tok in tokens:
        digest = hashlib.blake2b((salt + "\x00" + tok).encode("utf-8"), digest_size=8).digest()
        rows.append(np.random.default_rng(int.from_bytes(digest, "little")).standard_normal(dim))
    return np.array(rows).reshape(len(rows), dim)


def quadruple_loss(q: Quadruple, encode: Callable[[Sequence[str]], np.ndarray]) -> float:
    """Max-pool each section's token matrix and evaluate the four-term loss."""
    vecs = [max_pool(encode(s)) for s in (q.s_ki, q.s_k2i, q.s_kj, q.s_k2j)]
    return contrastive_loss(*vecs, q.alpha)
