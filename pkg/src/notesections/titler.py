"""Section-title discovery by DF-IAPF scoring of corpus n-grams.

A phrase scores high when it shows up in most documents but rarely more
than once inside any one of them, which is how section headers behave:

    df    = n_t / n_d
    iapf  = n_t / sum_i f(t, i)
    score = df * iapf = n_t**2 / (n_d * sum_i f(t, i))

The pipeline is count -> score -> top-K -> drop sub-phrases. Choosing the
final title set from the candidates is left to a human reviewer.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .corpus import Corpus, Document

Phrase = tuple[str, ...]

DEFAULT_MAX_NGRAM = 5
DEFAULT_TOP_K = 50


@dataclass
class PhraseStats:
    max_n: int
    n_d: int = 0
    n_t: Counter = field(default_factory=Counter)
    total_f: Counter = field(default_factory=Counter)

    def __add__(self, other: "PhraseStats") -> "PhraseStats":
        if self.max_n != other.max_n:
            raise ValueError("cannot merge stats with different max_n")
        return PhraseStats(self.max_n, self.n_d + other.n_d,
                           self.n_t + other.n_t, self.total_f + other.total_f)

    def __len__(self) -> int:
        return len(self.n_t)

    def __contains__(self, phrase: Phrase) -> bool:
        return phrase in self.n_t


@dataclass(frozen=True)
class TitleCandidate:
    phrase: Phrase
    score: float
    df: float
    iapf: float

    @property
    def text(self) -> str:
        return " ".join(self.phrase)


def _ngram_counts(tokens: Sequence[str], max_n: int) -> Counter:
    counts: Counter = Counter()
    n_tokens = len(tokens)
    for n in range(1, max_n + 1):
        for i in range(n_tokens - n + 1):
            counts[tuple(tokens[i:i + n])] += 1
    return counts


def _count_shard(token_lists: list[tuple[str, ...]], max_n: int) -> PhraseStats:
    stats = PhraseStats(max_n)
    for tokens in token_lists:
        per_doc = _ngram_counts(tokens, max_n)
        stats.n_d += 1
        stats.n_t.update(per_doc.keys())
        stats.total_f.update(per_doc)
    return stats


def count_ngrams(corpus: Corpus | Iterable[Document], max_n: int = DEFAULT_MAX_NGRAM,
                 workers: int = 1) -> PhraseStats:
    """Count every contiguous n-gram (1 <= n <= max_n) within each document.

    With ``workers > 1`` the corpus is split into contiguous shards counted in
    separate processes and merged by addition; counts are exact either way.
    """
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    token_lists = [doc.tokens for doc in corpus]
    if not token_lists:
        raise ValueError("cannot count n-grams of an empty corpus")
    if workers <= 1 or len(token_lists) < 2 * workers:
        return _count_shard(token_lists, max_n)
    size = -(-len(token_lists) // workers)
    shards = [token_lists[i:i + size] for i in range(0, len(token_lists), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_count_shard, shards, [max_n] * len(shards)))
    merged = PhraseStats(max_n)
    for part in parts:
        merged = merged + part
    return merged


def candidate_order(c: TitleCandidate):
    """Sort key: score desc, then longer phrase, then token-wise lexicographic."""
    return (-c.score, -len(c.phrase), c.phrase)


def score(stats: PhraseStats) -> list[TitleCandidate]:
    if stats.n_d <= 0:
        raise ValueError("stats cover no documents")
    out = []
    for phrase, n_t in stats.n_t.items():
        df = n_t / stats.n_d
        iapf = n_t / stats.total_f[phrase]
        out.append(TitleCandidate(phrase, df * iapf, df, iapf))
    out.sort(key=candidate_order)
    return out


def select_candidates(scored: Sequence[TitleCandidate], k: int) -> list[TitleCandidate]:
    if k < 1:
        raise ValueError("K must be >= 1")
    return sorted(scored, key=candidate_order)[:k]


def is_strict_subphrase(short: Phrase, long: Phrase) -> bool:
    """True if ``short`` occurs as a contiguous run inside the longer ``long``."""
    n = len(short)
    if n >= len(long):
        return False
    return any(long[i:i + n] == short for i in range(len(long) - n + 1))


def filter_subphrases(candidates: Sequence[TitleCandidate]) -> list[TitleCandidate]:
    # Judged against the full input set: in a chain a < b < c both a and b go.
    phrases = [c.phrase for c in candidates]
    return [c for c in candidates
            if not any(is_strict_subphrase(c.phrase, other) for other in phrases)]


def extract_titles(corpus: Corpus | Iterable[Document], max_n: int = DEFAULT_MAX_NGRAM,
                   top_k: int = DEFAULT_TOP_K, workers: int = 1) -> list[TitleCandidate]:
    stats = count_ngrams(corpus, max_n, workers=workers)
    return filter_subphrases(select_candidates(score(stats), top_k))


def format_candidates(candidates: Iterable[TitleCandidate]) -> str:
    return "".join(f"{c.text}\t{c.score:.6f}\t{c.df:.6f}\t{c.iapf:.6f}\n" for c in candidates)
