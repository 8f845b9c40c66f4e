import numpy as np
import pytest

from notesections.metrics import (PredictionRecord, code_universe, evaluate, load_predictions, micro_macro_f1,
                                  precision_at_k)

from oracles import naive_f1, naive_precision_at_k


def random_records(rng, n_docs=30, n_codes=12):
    codes = [f"c{i:02d}" for i in range(n_codes)]
    recs = []
    for d in range(n_docs):
        scored = rng.choice(codes, size=rng.integers(1, n_codes + 1), replace=False)
        # coarse grid makes score ties common
        scores = {str(c): float(rng.integers(0, 11)) / 10 for c in scored}
        gold = frozenset(str(c) for c in rng.choice(codes, size=rng.integers(0, 5), replace=False))
        recs.append(PredictionRecord(f"d{d}", scores, gold))
    return recs, codes


def perfect_records(n_docs=6, n_codes=20):
    codes = [f"c{i:02d}" for i in range(n_codes)]
    recs = []
    for d in range(n_docs):
        gold = frozenset(codes[(d + j) % n_codes] for j in range(16))
        recs.append(PredictionRecord(f"d{d}", {c: (0.9 if c in gold else 0.1) for c in codes}, gold))
    return recs, codes


def test_perfect_predictions():
    recs, codes = perfect_records()
    assert micro_macro_f1(recs, 0.5, codes) == (1.0, 1.0)
    for k in (5, 8, 15):
        assert precision_at_k(recs, k) == 1.0


def test_all_negative():
    recs = [PredictionRecord("a", {"x": 0.1, "y": 0.2}, frozenset({"x"}))]
    micro, macro = micro_macro_f1(recs, 0.5, ["x", "y"])
    assert micro == 0.0 and macro == 0.0


def test_zero_over_zero_code_counts_as_zero():
    recs = [PredictionRecord("a", {"x": 0.9}, frozenset({"x"}))]
    assert micro_macro_f1(recs, 0.5, ["x", "y"]) == (1.0, 0.5)


def test_threshold_is_inclusive():
    recs = [PredictionRecord("a", {"x": 0.5}, frozenset({"x"}))]
    assert micro_macro_f1(recs, 0.5, ["x"]) == (1.0, 1.0)


@pytest.mark.parametrize("seed", range(10))
def test_f1_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    recs, codes = random_records(rng)
    micro, macro = micro_macro_f1(recs, 0.5, codes)
    o_micro, o_macro = naive_f1([(r.scores, r.gold) for r in recs], 0.5, codes)
    assert micro == pytest.approx(o_micro, abs=1e-12)
    assert macro == pytest.approx(o_macro, abs=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_precision_matches_oracle(seed):
    recs, _ = random_records(np.random.default_rng(100 + seed))
    for k in (1, 5, 8, 15):
        assert precision_at_k(recs, k) == pytest.approx(
            naive_precision_at_k([(r.scores, r.gold) for r in recs], k), abs=1e-12)


def test_precision_ties_break_by_code():
    rec = PredictionRecord("a", {"b": 0.5, "a": 0.5, "c": 0.9}, frozenset({"a"}))
    assert precision_at_k([rec], 2) == 0.5
    rec = PredictionRecord("a", {"b": 0.5, "a": 0.5, "c": 0.9}, frozenset({"b"}))
    assert precision_at_k([rec], 2) == 0.0


def test_short_score_list_divides_by_k():
    rec = PredictionRecord("a", {"x": 0.9}, frozenset({"x"}))
    assert precision_at_k([rec], 5) == 0.2


def test_reordering_invariance():
    rng = np.random.default_rng(3)
    recs, codes = random_records(rng)
    base = micro_macro_f1(recs, 0.5, codes)
    shuffled = micro_macro_f1(recs[::-1], 0.5, codes[::-1])
    assert shuffled[0] == base[0]
    assert shuffled[1] == pytest.approx(base[1], abs=1e-15)


def test_adding_gold_already_in_top_k():
    rec = PredictionRecord("a", {"x": 0.9, "y": 0.8, "z": 0.1}, frozenset({"z"}))
    before = precision_at_k([rec], 2)
    after = precision_at_k([PredictionRecord("a", rec.scores, rec.gold | {"x"})], 2)
    assert after >= before


def test_errors():
    with pytest.raises(ValueError):
        micro_macro_f1([], 0.5, ["x"])
    with pytest.raises(ValueError):
        micro_macro_f1([PredictionRecord("a", {}, frozenset({"q"}))], 0.5, ["x"])
    with pytest.raises(ValueError):
        precision_at_k([PredictionRecord("a", {}, frozenset())], 0)
    with pytest.raises(ValueError):
        PredictionRecord("a", {"x": float("nan")})


def test_load_and_evaluate(tmp_path):
    path = tmp_path / "pred.jsonl"
    path.write_text('{"id": "a", "scores": {"x": 0.9, "y": 0.2}, "gold": ["x"]}\n'
                    '{"id": "b", "scores": {"x": 0.1, "y": 0.7}, "gold": ["x", "y"]}\n', encoding="utf-8")
    recs = load_predictions(path)
    assert code_universe(recs) == ["x", "y"]
    out = evaluate(recs, ks=(1,))
    assert out["p@1"] == 1.0
    assert out["micro_f1"] == pytest.approx(2 * 2 / (2 * 2 + 0 + 1))
    assert 0 <= out["macro_f1"] <= 1
