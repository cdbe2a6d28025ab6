"""Automatic tagging of failed argument predictions.

Only mechanically detectable categories are tagged. Label disagreement and
grammar-difference errors need a human and fall into ``unresolved_other``,
as does anything else not caught by the rules below.
"""
from __future__ import annotations

import json
import unicodedata
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .codec import Argument, ArgumentPrediction, EventInstance

BOTH_WRONG = "both_wrong"
OVER_GENERATING = "over_generating"
NOT_IN_PASSAGE = "not_in_passage"
WRONG_LANGUAGE = "wrong_language"
UNRESOLVED_OTHER = "unresolved_other"
CATEGORIES = (BOTH_WRONG, OVER_GENERATING, WRONG_LANGUAGE, NOT_IN_PASSAGE, UNRESOLVED_OTHER)

CATEGORY_LABELS = {
    BOTH_WRONG: "Errors on both monolingual and cross-lingual models",
    OVER_GENERATING: "Over-generating",
    WRONG_LANGUAGE: "Generating words in another language",
    NOT_IN_PASSAGE: "Generating words not appearing in the passage",
    UNRESOLVED_OTHER: "Other (incl. label disagreement, grammar difference)",
}

# (first code point, last code point, script)
_SCRIPT_RANGES = [
    (0x0041, 0x024F, "latin"),
    (0x0370, 0x03FF, "greek"),
    (0x0400, 0x052F, "cyrillic"),
    (0x0590, 0x05FF, "hebrew"),
    (0x0600, 0x06FF, "arabic"),
    (0x0750, 0x077F, "arabic"),
    (0x08A0, 0x08FF, "arabic"),
    (0x0900, 0x097F, "devanagari"),
    (0x0E00, 0x0E7F, "thai"),
    (0x1100, 0x11FF, "hangul"),
    (0x1E00, 0x1EFF, "latin"),
    (0x3040, 0x30FF, "kana"),
    (0x3400, 0x4DBF, "cjk"),
    (0x4E00, 0x9FFF, "cjk"),
    (0xAC00, 0xD7AF, "hangul"),
    (0xF900, 0xFAFF, "cjk"),
    (0xFB50, 0xFDFF, "arabic"),
    (0xFE70, 0xFEFF, "arabic"),
    (0x20000, 0x2FA1F, "cjk"),
]


def char_script(ch: str) -> Optional[str]:
    if not unicodedata.category(ch).startswith("L"):
        return None
    cp = ord(ch)
    for lo, hi, name in _SCRIPT_RANGES:
        if lo <= cp <= hi:
            return name
    return "other"


def dominant_script(text: str) -> Optional[str]:
    """Majority script over letters; ties go to the script seen first."""
    counts: Counter = Counter()
    order: Dict[str, int] = {}
    for ch in text:
        s = char_script(ch)
        if s is not None:
            counts[s] += 1
            order.setdefault(s, len(order))
    if not counts:
        return None
    return max(counts, key=lambda s: (counts[s], -order[s]))


@dataclass(frozen=True)
class ErrorTag:
    category: str
    evidence: str = ""


def _same(a: ArgumentPrediction, b: ArgumentPrediction) -> bool:
    return a.role == b.role and a.text.strip() == b.text.strip()


def classify_errors(
    pred: ArgumentPrediction,
    gold: Optional[Sequence[Argument]],
    instance: EventInstance,
    reference_pred: Union[ArgumentPrediction, Iterable[ArgumentPrediction], None] = None,
) -> ErrorTag:
    """Tag one failed prediction; the first matching rule wins.

    1. the reference model made the same prediction -> ``both_wrong``
    2. prediction is passage text strictly containing a same-role gold argument -> ``over_generating``
    3. prediction's dominant script differs from the passage's -> ``wrong_language``
    4. prediction is not a substring of the passage -> ``not_in_passage``
    5. otherwise ``unresolved_other``
    """
    gold = instance.arguments if gold is None else gold
    if reference_pred is not None:
        refs = [reference_pred] if isinstance(reference_pred, ArgumentPrediction) else list(reference_pred)
        for ref in refs:
            if _same(ref, pred):
                return ErrorTag(BOTH_WRONG, f"reference model also predicted {pred.text!r} as {pred.role}")
    text = pred.text.strip()
    in_passage = text in instance.text
    for g in gold:
        if in_passage and g.role == pred.role and g.text != text and g.text in text:
            return ErrorTag(OVER_GENERATING, f"{text!r} contains gold {g.text!r}")
    ps, xs = dominant_script(text), dominant_script(instance.text)
    if ps is not None and xs is not None and ps != xs:
        return ErrorTag(WRONG_LANGUAGE, f"prediction script {ps}, passage script {xs}")
    if not in_passage:
        return ErrorTag(NOT_IN_PASSAGE, f"{text!r} does not occur in the passage")
    return ErrorTag(UNRESOLVED_OTHER, "")


def failed_predictions(preds: Iterable[ArgumentPrediction], instance: EventInstance) -> List[ArgumentPrediction]:
    gold = {(a.start, a.end, a.role) for a in instance.arguments}
    out = []
    for p in preds:
        if p.span is None or (p.span[0], p.span[1], p.role) not in gold:
            out.append(p)
    return out


def error_report(failed_preds: Sequence, tags: Sequence[ErrorTag]) -> Dict[str, Tuple[int, Fraction]]:
    """category -> (count, fraction); empty when nothing failed."""
    if len(failed_preds) != len(tags):
        raise ValueError("tags must align with failed predictions")
    counts = Counter(t.category for t in tags)
    total = sum(counts.values())
    return {c: (counts[c], Fraction(counts[c], total)) for c in CATEGORIES if counts[c]}


def write_error_report(distribution: Dict[str, Tuple[int, Fraction]], path: str | Path, title: str = "") -> None:
    path = Path(path)
    total = sum(n for n, _ in distribution.values())
    lines = [title or "Distribution of errors", f"failed predictions: {total}",
             "# label disagreement and grammar-difference errors are not auto-tagged;",
             "# they are counted under 'Other'.", ""]
    for c in CATEGORIES:
        n, frac = distribution.get(c, (0, Fraction(0)))
        lines.append(f"{CATEGORY_LABELS[c]:<56} {n:>5} {float(frac) * 100:>6.1f}%")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    record = {c: {"count": n, "fraction": float(f)} for c, (n, f) in distribution.items()}
    Path(str(path) + ".json").write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")
