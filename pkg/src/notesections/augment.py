"""Masked-and-shuffled section views for training; identity view for inference."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .segmenter import SectionedDocument, reassemble
from .titler import Phrase

DEFAULT_GAMMA = 0.2
GAMMA_PRESETS = {"mimic-full": 0.2, "mimic-50": 0.3, "mimic-rare-50": 0.3}


@dataclass(frozen=True)
class MaskPlan:
    order: tuple[int, ...]      # permutation of section indices
    thetas: tuple[float, ...]   # one draw per non-empty section, in permuted order


@dataclass(frozen=True)
class AugmentedNote:
    doc_id: str
    tokens: tuple[str, ...]
    kept_titles: tuple[Phrase, ...]
    gamma: float
    seed: int

    @property
    def fully_masked(self) -> bool:
        return not self.kept_titles


def derive_seed(seed: int, doc_id: str, epoch: int = 0) -> int:
    """Per-document seed that does not depend on corpus order."""
    h = hashlib.blake2b(f"{doc_id}\x00{epoch}".encode("utf-8"), digest_size=8).digest()
    return (seed ^ int.from_bytes(h, "little")) & (2**64 - 1)


def mask_plan(sd: SectionedDocument, seed: int) -> MaskPlan:
    rng = np.random.default_rng(seed)
    order = tuple(int(k) for k in rng.permutation(len(sd.sections)))
    n_nonempty = sum(1 for k in order if sd.sections[k].body_end > sd.sections[k].body_start)
    return MaskPlan(order, tuple(float(t) for t in rng.random(n_nonempty)))


def apply_plan(sd: SectionedDocument, plan: MaskPlan, gamma: float, seed: int = 0) -> AugmentedNote:
    if not 0 <= gamma < 1:
        raise ValueError(f"gamma must satisfy 0 <= gamma < 1, got {gamma}")
    tokens = list(sd.preamble)
    kept = []
    thetas = iter(plan.thetas)
    for k in plan.order:
        s = sd.sections[k]
        if s.body_end == s.body_start:
            continue
        if next(thetas) >= gamma:
            kept.append(s.title)
            tokens.extend(sd.section_tokens(s))
    return AugmentedNote(sd.doc_id, tuple(tokens), tuple(kept), gamma, seed)


def mask_and_permute(sd: SectionedDocument, gamma: float = DEFAULT_GAMMA, seed: int = 0) -> AugmentedNote:
    """Shuffle sections, drop each non-empty one with probability ``gamma``.

    Empty sections are always dropped. The preamble is never masked and
    always comes first. Everything may be masked, leaving the preamble alone.
    """
    if not 0 <= gamma < 1:
        raise ValueError(f"gamma must satisfy 0 <= gamma < 1, got {gamma}")
    return apply_plan(sd, mask_plan(sd, seed), gamma, seed)


def inference_view(sd: SectionedDocument) -> tuple[str, ...]:
    return reassemble(sd)
