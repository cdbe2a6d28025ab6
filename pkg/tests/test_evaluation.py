import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from crossarg.codec import Argument, ArgumentPrediction, EventInstance, Span
from crossarg.data import PredictionRecord
from crossarg.evaluation import ScoreReport, aggregate_seeds, format_pair_table, prf, score, write_report


def oracle(pred_sets, gold_sets):
    """Brute-force micro P/R/F1 by explicit set intersection."""
    g = sum(len(s) for s in gold_sets)
    p = sum(len(s) for s in pred_sets)
    c = sum(len(ps & gs) for ps, gs in zip(pred_sets, gold_sets))
    P = Fraction(c, p) if p else Fraction(0)
    R = Fraction(c, g) if g else Fraction(0)
    F = 2 * P * R / (P + R) if P + R else Fraction(0)
    return P, R, F


def _inst(i, spans):
    text = "x" * 40
    return EventInstance(text=text, trigger=Span(0, 1, "x"), event_type="E", sent_id=str(i),
                         arguments=[Argument(s, e, text[s:e], r) for s, e, r in spans])


def _preds(spans):
    return [ArgumentPrediction(r, "x" * (e - s), (s, e), "exact") for s, e, r in spans]


def test_identity_and_disjoint():
    golds = [_inst(0, [(1, 3, "A"), (4, 6, "B")])]
    assert score([_preds([(1, 3, "A"), (4, 6, "B")])], golds).f1 == 1
    assert score([_preds([(7, 9, "A")])], golds).f1 == 0


def test_half_case():
    golds = [_inst(0, [(1, 3, "A"), (4, 6, "B")])]
    r = score([_preds([(1, 3, "A"), (4, 6, "A")])], golds)
    assert (r.precision, r.recall, r.f1) == (Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))


def test_role_matters_and_unresolved_counts():
    golds = [_inst(0, [(1, 3, "A")])]
    r = score([[ArgumentPrediction("A", "zz"), *_preds([(1, 3, "A")])]], golds)
    assert (r.num_pred, r.num_correct) == (2, 1)


def test_keyed_predictions_and_unknown_key():
    golds = [_inst(0, [(1, 3, "A")]), _inst(1, [(2, 4, "A")])]
    rec = PredictionRecord("", "1", "E", (0, 1), _preds([(2, 4, "A")]))
    r = score([rec], golds)
    assert (r.num_gold, r.num_correct) == (2, 1)
    with pytest.raises(KeyError):
        score([PredictionRecord("", "9", "E", (0, 1), [])], golds)


pair = st.tuples(st.integers(0, 8), st.integers(1, 4), st.sampled_from("AB"))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.sets(pair, max_size=5), st.sets(pair, max_size=5)), min_size=1, max_size=6))
def test_matches_oracle(rows):
    golds, preds, gsets, psets = [], [], [], []
    for i, (g, p) in enumerate(rows):
        g = {(s, s + l, r) for s, l, r in g}
        p = {(s, s + l, r) for s, l, r in p}
        golds.append(_inst(i, sorted(g)))
        preds.append(_preds(sorted(p)))
        gsets.append(g)
        psets.append(p)
    r = score(preds, golds)
    assert (r.precision, r.recall, r.f1) == oracle(psets, gsets)
    swapped = score([_preds(sorted(g)) for g in gsets], [_inst(i, sorted(p)) for i, p in enumerate(psets)])
    assert swapped.f1 == r.f1 and swapped.precision == r.recall


def test_adding_a_correct_prediction_never_lowers_recall():
    rng = random.Random(0)
    for _ in range(100):
        gold = {(rng.randint(0, 9), rng.randint(10, 12), "A") for _ in range(4)}
        pred = {(rng.randint(0, 9), rng.randint(10, 12), "A") for _ in range(3)}
        extra = rng.choice(sorted(gold))
        a = score([_preds(sorted(pred))], [_inst(0, sorted(gold))])
        b = score([_preds(sorted(pred | {extra}))], [_inst(0, sorted(gold))])
        assert b.recall >= a.recall and b.num_correct >= a.num_correct


def test_empty_is_zero():
    assert prf(0, 0, 0) == (0, 0, 0)


def test_aggregate():
    r = ScoreReport.from_counts(10, 10, 5)
    same = aggregate_seeds([r, r, r])
    assert (same.precision, same.recall, same.f1) == (r.precision, r.recall, r.f1)
    reps = [ScoreReport(Fraction(f), Fraction(f), Fraction(f), 1, 1, 1) for f in ("0.4", "0.5", "0.6")]
    assert aggregate_seeds(reps).f1 == Fraction(1, 2)
    assert aggregate_seeds([r]).f1 == r.f1
    with pytest.raises(ValueError):
        aggregate_seeds([])


def test_pair_table_shape():
    table = format_pair_table({"copy on": {("en", "en"): 0.9, ("en", "zh"): 0.5}, "copy off": {("en", "en"): 0.8}})
    lines = table.splitlines()
    assert "en => en" in lines[0] and "en => zh" in lines[0] and "avg" in lines[0]
    assert "70.0" in lines[2] and "-" in lines[3]


def test_write_report(tmp_path):
    r = ScoreReport.from_counts(4, 2, 1, by_role={"A": (4, 2, 1)})
    write_report(r, tmp_path / "r.txt", title="t")
    assert "F1=33.33" in (tmp_path / "r.txt").read_text()
    assert json.loads((tmp_path / "r.txt.json").read_text())["by_role"]["A"]["correct"] == 1
