"""Argument classification scoring over (offset, role) pairs."""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from .codec import ArgumentPrediction, EventInstance

Counts = Tuple[int, int, int]  # (gold, pred, correct)


def prf(num_gold: int, num_pred: int, num_correct: int) -> Tuple[Fraction, Fraction, Fraction]:
    p = Fraction(num_correct, num_pred) if num_pred else Fraction(0)
    r = Fraction(num_correct, num_gold) if num_gold else Fraction(0)
    f = 2 * p * r / (p + r) if p + r else Fraction(0)
    return p, r, f


@dataclass
class ScoreReport:
    precision: Fraction
    recall: Fraction
    f1: Fraction
    num_gold: int
    num_pred: int
    num_correct: int
    by_event_type: Dict[str, Counts] = field(default_factory=dict)
    by_role: Dict[str, Counts] = field(default_factory=dict)

    @classmethod
    def from_counts(cls, g: int, p: int, c: int, **breakdown) -> "ScoreReport":
        return cls(*prf(g, p, c), g, p, c, **breakdown)

    def to_dict(self) -> dict:
        def rows(table):
            return {k: dict(zip(("gold", "pred", "correct"), v), f1=float(prf(*v)[2])) for k, v in sorted(table.items())}

        return {
            "precision": float(self.precision),
            "recall": float(self.recall),
            "f1": float(self.f1),
            "num_gold": self.num_gold,
            "num_pred": self.num_pred,
            "num_correct": self.num_correct,
            "by_event_type": rows(self.by_event_type),
            "by_role": rows(self.by_role),
        }

    def summary(self) -> str:
        return (
            f"P={float(self.precision) * 100:.2f} R={float(self.recall) * 100:.2f} "
            f"F1={float(self.f1) * 100:.2f} (gold={self.num_gold} pred={self.num_pred} correct={self.num_correct})"
        )


def gold_pairs(inst: EventInstance) -> set:
    return {(a.start, a.end, a.role) for a in inst.arguments}


def pred_pairs(preds: Iterable[ArgumentPrediction]) -> set:
    out = set()
    for p in preds:
        if p.span is None:
            out.add(("unresolved", p.text, p.role))  # counted, never matches a gold pair
        else:
            out.add((p.span[0], p.span[1], p.role))
    return out


def _align(preds, instances: List[EventInstance]) -> List[Sequence[ArgumentPrediction]]:
    if isinstance(preds, Mapping):
        keyed = dict(preds)
    elif preds and hasattr(preds[0], "key") and hasattr(preds[0], "predictions"):
        keyed = {r.key: r.predictions for r in preds}
    else:
        preds = list(preds)
        if len(preds) != len(instances):
            raise ValueError(f"{len(preds)} prediction lists for {len(instances)} instances")
        return preds
    known = {i.key for i in instances}
    unknown = [k for k in keyed if k not in known]
    if unknown:
        raise KeyError(f"prediction references unknown instance {unknown[0]}")
    return [keyed.get(i.key, []) for i in instances]


def score(preds, golds) -> ScoreReport:
    """Micro-averaged P/R/F1 over the split.

    ``preds`` is either a list aligned with the gold events, a mapping from
    instance key to predictions, or a list of prediction records.
    """
    instances = [i for i in (golds.instances if hasattr(golds, "instances") else golds) if i.trigger is not None]
    aligned = _align(preds, instances)
    g_tot = p_tot = c_tot = 0
    by_type: Dict[str, List[int]] = defaultdict(lambda: [0, 0, 0])
    by_role: Dict[str, List[int]] = defaultdict(lambda: [0, 0, 0])
    for inst, plist in zip(instances, aligned):
        gs = gold_pairs(inst)
        ps = pred_pairs(plist)
        correct = gs & ps
        g_tot += len(gs)
        p_tot += len(ps)
        c_tot += len(correct)
        t = by_type[inst.event_type]
        t[0] += len(gs)
        t[1] += len(ps)
        t[2] += len(correct)
        for pair in gs:
            by_role[pair[-1]][0] += 1
        for pair in ps:
            by_role[pair[-1]][1] += 1
        for pair in correct:
            by_role[pair[-1]][2] += 1
    return ScoreReport.from_counts(
        g_tot, p_tot, c_tot,
        by_event_type={k: tuple(v) for k, v in by_type.items()},
        by_role={k: tuple(v) for k, v in by_role.items()},
    )


def aggregate_seeds(reports: Sequence[ScoreReport]) -> ScoreReport:
    """Mean P/R/F1 across runs; counts are summed."""
    if not reports:
        raise ValueError("no reports to aggregate")
    n = len(reports)
    return ScoreReport(
        precision=sum((r.precision for r in reports), Fraction(0)) / n,
        recall=sum((r.recall for r in reports), Fraction(0)) / n,
        f1=sum((r.f1 for r in reports), Fraction(0)) / n,
        num_gold=sum(r.num_gold for r in reports),
        num_pred=sum(r.num_pred for r in reports),
        num_correct=sum(r.num_correct for r in reports),
    )


def format_pair_table(rows: Mapping[str, Mapping[Tuple[str, str], float]]) -> str:
    """Text grid with one column per ``src => tgt`` pair plus the average.

    Values are F1 in [0, 1] and printed as percentages.
    """
    pairs: List[Tuple[str, str]] = []
    for cells in rows.values():
        for pair in cells:
            if pair not in pairs:
                pairs.append(pair)
    headers = ["model"] + [f"{s} => {t}" for s, t in pairs] + ["avg"]
    lines = []
    body = []
    for name, cells in rows.items():
        vals = [cells.get(p) for p in pairs]
        present = [v for v in vals if v is not None]
        avg = sum(present) / len(present) if present else None
        body.append([name] + [f"{v * 100:.1f}" if v is not None else "-" for v in vals]
                    + [f"{avg * 100:.1f}" if avg is not None else "-"])
    widths = [max(len(str(r[i])) for r in [headers] + body) for i in range(len(headers))]
    fmt = " | ".join("{:<%d}" % w for w in widths)
    lines.append(fmt.format(*headers))
    lines.append("-+-".join("-" * w for w in widths))
    lines.extend(fmt.format(*r) for r in body)
    return "\n".join(lines)


def write_report(report: ScoreReport, path: str | Path, title: str = "") -> None:
    """Write ``<path>`` as text and ``<path>.json`` as a machine-readable record."""
    path = Path(path)
    lines = [title] if title else []
    lines.append(report.summary())
    if report.by_event_type:
        lines.append("")
        lines.append(f"{'event type':<36} {'gold':>6} {'pred':>6} {'corr':>6} {'F1':>7}")
        for k, v in sorted(report.by_event_type.items()):
            lines.append(f"{k:<36} {v[0]:>6} {v[1]:>6} {v[2]:>6} {float(prf(*v)[2]) * 100:>7.2f}")
    if report.by_role:
        lines.append("")
        lines.append(f"{'role':<36} {'gold':>6} {'pred':>6} {'corr':>6} {'F1':>7}")
        for k, v in sorted(report.by_role.items()):
            lines.append(f"{k:<36} {v[0]:>6} {v[1]:>6} {v[2]:>6} {float(prf(*v)[2]) * 100:>7.2f}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    Path(str(path) + ".json").write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
