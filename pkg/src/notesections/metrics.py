"""Multi-label evaluation: micro/macro F1 and precision@k."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import CorpusError, iter_records

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class PredictionRecord:
    doc_id: str
    scores: Mapping[str, float]
    gold: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        for code, s in self.scores.items():
            if not math.isfinite(s):
                raise ValueError(f"{self.doc_id}: non-finite score for {code}")


def _binary_matrices(records: Sequence[PredictionRecord], threshold: float,
                     universe: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    col = {c: n for n, c in enumerate(universe)}
    pred = np.zeros((len(records), len(universe)), dtype=bool)
    gold = np.zeros_like(pred)
    for r, rec in enumerate(records):
        for code in rec.gold:
            if code not in col:
                raise ValueError(f"{rec.doc_id}: gold code {code} outside the code universe")
            gold[r, col[code]] = True
        for code, s in rec.scores.items():
            if s >= threshold and code in col:
                pred[r, col[code]] = True
    return pred, gold


def micro_macro_f1(records: Sequence[PredictionRecord], threshold: float = DEFAULT_THRESHOLD,
                   universe: Sequence[str] | None = None) -> tuple[float, float]:
    """Return ``(micro_f1, macro_f1)``; a code with no gold and no predicted positives scores 0."""
    if not records:
        raise ValueError("no prediction records")
    if universe is None:
        universe = code_universe(records)
    if not universe:
        raise ValueError("empty code universe")
    pred, gold = _binary_matrices(records, threshold, universe)
    tp = (pred & gold).sum(axis=0)
    fp = (pred & ~gold).sum(axis=0)
    fn = (~pred & gold).sum(axis=0)
    denom = 2 * tp + fp + fn
    per_code = np.divide(2 * tp, denom, out=np.zeros(len(universe)), where=denom > 0)
    micro_denom = 2 * tp.sum() + fp.sum() + fn.sum()
    micro = 2 * tp.sum() / micro_denom if micro_denom else 0.0
    return float(micro), float(per_code.mean())


def precision_at_k(records: Sequence[PredictionRecord], k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    if not records:
        raise ValueError("no prediction records")
    total = 0.0
    for rec in records:
        top = sorted(rec.scores, key=lambda c: (-rec.scores[c], c))[:k]
        total += sum(1 for c in top if c in rec.gold) / k
    return total / len(records)


def code_universe(records: Sequence[PredictionRecord]) -> list[str]:
    codes: set[str] = set()
    for rec in records:
        codes.update(rec.scores)
        codes.update(rec.gold)
    return sorted(codes)


def load_predictions(path: str | Path) -> list[PredictionRecord]:
    records = []
    for lineno, rec in iter_records(path):
        try:
            scores = {str(c): float(s) for c, s in rec["scores"].items()}
            records.append(PredictionRecord(str(rec["id"]), scores, frozenset(rec.get("gold") or ())))
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise CorpusError(f"line {lineno}: malformed prediction record ({exc})") from None
    return records


def evaluate(records: Sequence[PredictionRecord], ks: Sequence[int] = (5, 8, 15),
             threshold: float = DEFAULT_THRESHOLD) -> dict[str, float]:
    micro, macro = micro_macro_f1(records, threshold)
    out = {"macro_f1": macro, "micro_f1": micro}
    for k in ks:
        out[f"p@{k}"] = precision_at_k(records, k)
    return out


def prediction_to_json(rec: PredictionRecord) -> str:
    return json.dumps({"id": rec.doc_id, "scores": dict(rec.scores), "gold": sorted(rec.gold)})
