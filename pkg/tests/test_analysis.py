import json
from fractions import Fraction

from crossarg.analysis import (
    BOTH_WRONG,
    CATEGORIES,
    ErrorTag,
    char_script,
    classify_errors,
    dominant_script,
    error_report,
    failed_predictions,
    write_error_report,
)
from crossarg.codec import ArgumentPrediction

from conftest import FIXTURES
from strategies import make_instance


def load_taxonomy_fixture():
    """(prediction, instance, reference predictions, expected tag) per row."""
    rows = []
    for row in json.loads((FIXTURES / "error_taxonomy.json").read_text(encoding="utf-8")):
        inst = make_instance(row["passage"], row["trigger"], [tuple(g) for g in row["gold"]], event_type="E")
        pred = ArgumentPrediction(row["pred"][1], row["pred"][0])
        refs = [ArgumentPrediction(r, t) for t, r in row["reference"]] or None
        rows.append((pred, inst, refs, row["expected"]))
    return rows


def test_scripts():
    assert char_script("a") == "latin" and char_script("中") == "cjk" and char_script("ب") == "arabic"
    assert char_script("1") is None
    assert dominant_script("abc 中") == "latin" and dominant_script("...") is None


def test_canonical_patterns():
    inst = make_instance("The EU foreign ministers met in Brussels.", "met", [("ministers", "Entity")])
    tag = classify_errors(ArgumentPrediction("Entity", "The EU foreign ministers"), None, inst)
    assert tag.category == "over_generating"
    inst = make_instance("They filmed at the studio.", "filmed", [("studio", "Place")])
    assert classify_errors(ArgumentPrediction("Place", "studios"), None, inst).category == "not_in_passage"
    assert classify_errors(ArgumentPrediction("Place", "工作室"), None, inst).category == "wrong_language"


def test_fixture_agreement():
    rows = load_taxonomy_fixture()
    assert len(rows) == 30
    for pred, inst, refs, expected in rows:
        assert classify_errors(pred, None, inst, refs).category == expected


def test_failed_predictions_filters_correct_ones():
    inst = make_instance("a b c d", "b", [("c", "R")])
    good = ArgumentPrediction("R", "c", (4, 5), "exact")
    bad = ArgumentPrediction("R", "d", (6, 7), "exact")
    assert failed_predictions([good, bad, ArgumentPrediction("R", "z")], inst) == [bad, ArgumentPrediction("R", "z")]


def test_distribution():
    assert error_report([], []) == {}
    one = error_report([None] * 3, [ErrorTag(BOTH_WRONG, "")] * 3)
    assert one == {BOTH_WRONG: (3, Fraction(1))}
    tags = [ErrorTag(CATEGORIES[i % 5], "") for i in range(30)]
    dist = error_report([None] * 30, tags)
    assert sum(f for _, f in dist.values()) == 1


def test_write_error_report(tmp_path):
    write_error_report({BOTH_WRONG: (2, Fraction(1))}, tmp_path / "e.txt")
    assert "100.0%" in (tmp_path / "e.txt").read_text()
    assert json.loads((tmp_path / "e.txt.json").read_text())[BOTH_WRONG]["count"] == 2
