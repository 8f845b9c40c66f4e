"""Exit criteria. Each test carries its criterion number; a summary line per criterion is printed at the end."""

import time
from collections import Counter

import numpy as np
import pytest

from notesections.augment import derive_seed, mask_and_permute
from notesections.cli import main
from notesections.corpus import Corpus, Document
from notesections.labeltree import soft_similarity, super_tree, tree_edit_distance
from notesections.metrics import PredictionRecord, micro_macro_f1, precision_at_k
from notesections.pairs import contrastive_loss
from notesections.segmenter import DEFAULT_TITLES, TitleSet, reassemble, segment
from notesections.synthetic import example_hierarchy, generate_documents, random_hierarchy
from notesections.titler import count_ngrams, extract_titles, score

from oracles import brute_force_ted, closure, naive_f1, naive_precision_at_k, naive_phrase_scores, nested_from_nodes

acceptance = pytest.mark.acceptance


@acceptance(1, "Worked super-tree example: TED = 2, alpha = 0.2, < 1 s")
def test_example_reproduction():
    start = time.perf_counter()
    h = example_hierarchy()
    a, b = super_tree(h, {"5", "7"}), super_tree(h, {"2", "6"})
    assert tree_edit_distance(a, b) == 2
    assert abs(soft_similarity(a, b) - 0.2) <= 1e-12
    assert time.perf_counter() - start < 1.0


@acceptance(2, "TED equals exhaustive mapping oracle on 200 pairs of <= 6-node super-trees, < 30 s")
def test_ted_oracle_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(20240601)
    pairs = 0
    while pairs < 200:
        h = random_hierarchy(int(rng.integers(2, 12)), rng)
        nodes = sorted(h.nodes - {h.root})
        a = set(rng.choice(nodes, size=rng.integers(1, 4)))
        b = set(rng.choice(nodes, size=rng.integers(1, 4)))
        ta, tb = super_tree(h, a), super_tree(h, b)
        if len(ta) > 6 or len(tb) > 6:
            continue
        oa = nested_from_nodes(closure(a, h.parent, h.root), h.parent, h.root)
        ob = nested_from_nodes(closure(b, h.parent, h.root), h.parent, h.root)
        assert tree_edit_distance(ta, tb) == brute_force_ted(oa, ob), (a, b)
        pairs += 1
    assert time.perf_counter() - start < 30


@acceptance(3, "DF-IAPF equals naive recount on 100 docs (<= 200 tokens, N_max = 3) to 1e-12, < 20 s")
def test_dfiapf_oracle_equivalence():
    start = time.perf_counter()
    docs = generate_documents(100, DEFAULT_TITLES[:10], seed=31, body_len=(1, 12))
    assert max(len(d.tokens) for d in docs) <= 200
    stats = count_ngrams(docs, 3)
    got = {c.phrase: c.score for c in score(stats)}
    expected = naive_phrase_scores([list(d.tokens) for d in docs], 3)
    assert got.keys() == expected.keys()
    worst = max(abs(got[p] - float(e[2])) for p, e in expected.items())
    assert worst <= 1e-12
    assert time.perf_counter() - start < 20


@acceptance(4, "All 23 planted default titles recovered (N_max = 5, K = 50, 200 docs), < 60 s")
def test_planted_title_recovery():
    start = time.perf_counter()
    docs = generate_documents(200, DEFAULT_TITLES, seed=2023)
    found = {c.text for c in extract_titles(docs, max_n=5, top_k=50)}
    recall = len(set(DEFAULT_TITLES) & found) / len(DEFAULT_TITLES)
    assert recall == 1.0, sorted(set(DEFAULT_TITLES) - found)
    assert time.perf_counter() - start < 60


@acceptance(5, "Duplicating every document leaves every DF-IAPF score bit-identical (20 seeds)")
def test_duplication_invariance():
    for seed in range(20):
        docs = generate_documents(30, DEFAULT_TITLES, seed=seed, title_prob=0.7, repeat_prob=0.3)
        doubled = Corpus(tuple(docs) + tuple(Document(d.id + "_dup", d.raw_text, d.tokens) for d in docs))
        once = {c.phrase: c.score for c in score(count_ngrams(docs, 5))}
        twice = {c.phrase: c.score for c in score(count_ngrams(doubled, 5))}
        assert once == twice


@acceptance(6, "reassemble(segment(d)) == d.tokens on 1,000 generated documents")
def test_segmentation_losslessness():
    ts = TitleSet.default()
    docs = (generate_documents(500, DEFAULT_TITLES, seed=6)
            + generate_documents(500, DEFAULT_TITLES, seed=60, title_prob=0.6, repeat_prob=0.5))
    failures = sum(reassemble(segment(d, ts)) != d.tokens for d in docs)
    assert len(docs) == 1000 and failures == 0


@acceptance(7, "alpha in [-1, 1], symmetric, alpha(a, a) = 1 on 500 pairs over a 40-node hierarchy")
def test_similarity_bounds_and_symmetry():
    rng = np.random.default_rng(7)
    h = random_hierarchy(40, rng)
    nodes = sorted(h.nodes - {h.root})
    for _ in range(500):
        a = super_tree(h, set(rng.choice(nodes, size=rng.integers(1, 6))))
        b = super_tree(h, set(rng.choice(nodes, size=rng.integers(1, 6))))
        alpha = soft_similarity(a, b)
        assert -1 <= alpha <= 1
        assert alpha == soft_similarity(b, a)
        assert soft_similarity(a, a) == 1.0 and soft_similarity(b, b) == 1.0


@acceptance(8, "Keep rate in [0.68, 0.72] over >= 10,000 sections at gamma = 0.3; gamma = 0 conserves tokens")
def test_mask_keep_rate():
    ts = TitleSet.default()
    notes = [segment(d, ts) for d in generate_documents(450, DEFAULT_TITLES, seed=8)]
    kept = total = 0
    for sd in notes:
        view = mask_and_permute(sd, 0.3, derive_seed(8, sd.doc_id))
        kept += len(view.kept_titles)
        total += sum(1 for s in sd.sections if s.body_end > s.body_start)
        assert Counter(mask_and_permute(sd, 0.0, derive_seed(9, sd.doc_id)).tokens) == Counter(sd.tokens)
    assert total >= 10_000
    assert 0.68 <= kept / total <= 0.72, kept / total


@acceptance(9, "Contrastive loss: zero at identity, scale invariant (1e-9), orthogonal case = 0.4 (1e-9)")
def test_contrastive_loss_properties():
    rng = np.random.default_rng(9)
    v = rng.standard_normal(16)
    assert contrastive_loss(v, v, v, v, 1.0) == pytest.approx(0.0, abs=1e-9)
    for _ in range(200):
        vecs = rng.standard_normal((4, 16))
        alpha = float(rng.uniform(-1, 1))
        scales = rng.uniform(0.01, 100, size=4)
        base = contrastive_loss(*vecs, alpha)
        assert abs(contrastive_loss(*(vecs * scales[:, None]), alpha) - base) <= 1e-9
    e1, e2 = np.eye(2)
    assert abs(contrastive_loss(e1, e1, e2, e2, 0.2) - 0.4) <= 1e-9


@acceptance(10, "Micro/macro F1 and P@{5,8,15} equal naive oracles on 50 instances (1e-12); perfect = 1.0")
def test_metrics_oracles():
    for seed in range(50):
        rng = np.random.default_rng(1000 + seed)
        n_codes = int(rng.integers(5, 30))
        codes = [f"{c:03d}.{rng.integers(10)}" for c in rng.choice(1000, n_codes, replace=False)]
        records = []
        for d in range(int(rng.integers(1, 40))):
            scores = {c: float(rng.integers(0, 21)) / 20 for c in codes if rng.random() < 0.8}
            gold = frozenset(c for c in codes if rng.random() < 0.2)
            records.append(PredictionRecord(f"d{d}", scores, gold))
        threshold = float(rng.choice([0.3, 0.5, 0.7]))
        micro, macro = micro_macro_f1(records, threshold, codes)
        raw = [(r.scores, r.gold) for r in records]
        o_micro, o_macro = naive_f1(raw, threshold, codes)
        assert abs(micro - o_micro) <= 1e-12 and abs(macro - o_macro) <= 1e-12
        for k in (5, 8, 15):
            assert abs(precision_at_k(records, k) - naive_precision_at_k(raw, k)) <= 1e-12
    codes = [f"c{i:02d}" for i in range(20)]
    perfect = []
    for d in range(8):
        gold = frozenset(codes[(d + j) % 20] for j in range(15))
        perfect.append(PredictionRecord(f"p{d}", {c: float(c in gold) for c in codes}, gold))
    assert micro_macro_f1(perfect, 0.5, codes) == (1.0, 1.0)
    assert all(precision_at_k(perfect, k) == 1.0 for k in (5, 8, 15))


@acceptance(11, "make-pairs and augment reruns with identical seeds are byte-identical")
def test_cli_determinism(tmp_path):
    corpus, hier, titles, seg = (str(tmp_path / n) for n in ("c.jsonl", "h.tsv", "t.txt", "s.jsonl"))
    assert main(["gen-synthetic", "--docs", "80", "--seed", "1", "--out", corpus,
                 "--hierarchy-out", hier, "--titles-out", titles]) == 0
    assert main(["segment", "--corpus", corpus, "--titles", titles, "--out", seg]) == 0
    outputs = {}
    for run in ("a", "b"):
        pairs, aug = tmp_path / f"pairs_{run}.jsonl", tmp_path / f"aug_{run}.jsonl"
        assert main(["make-pairs", "--segmented", seg, "--hierarchy", hier, "--titles", titles,
                     "--count", "500", "--seed", "42", "--out", str(pairs)]) == 0
        assert main(["augment", "--segmented", seg, "--gamma", "0.3", "--seed", "42", "--epochs", "3",
                     "--out", str(aug)]) == 0
        outputs[run] = (pairs.read_bytes(), aug.read_bytes())
    assert outputs["a"] == outputs["b"]
    assert len(outputs["a"][0].splitlines()) == 501
