"""Instance and prediction files, split statistics, and long-sentence splitting."""
from __future__ import annotations

import json
import os
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple

from .codec import UNRESOLVED, Argument, ArgumentPrediction, CodecError, EventInstance, Span
from .templates import EventOntology

PUNCT_BREAKS = frozenset(".,;:!?،؛؟。，；：！？")


class DataError(ValueError):
    pass


@dataclass
class DatasetSplit:
    instances: List[EventInstance] = field(default_factory=list)
    language: str = ""

    @property
    def events(self) -> List[EventInstance]:
        return [i for i in self.instances if i.trigger is not None]

    @property
    def counts(self) -> Tuple[int, int, int]:
        """(#sentences, #events, #arguments)."""
        sents = {(i.doc_id, i.sent_id) for i in self.instances}
        events = self.events
        return len(sents), len(events), sum(len(e.arguments) for e in events)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)


# -- instance files ---------------------------------------------------------

def instance_from_record(rec: Mapping, ontology: Optional[EventOntology] = None) -> EventInstance:
    text = rec["text"]
    trig = rec.get("trigger")
    etype = rec.get("event_type")
    trigger = None
    if trig is not None:
        trigger = Span(int(trig["start"]), int(trig["end"]), trig.get("text", text[trig["start"]:trig["end"]]))
        if text[trigger.start:trigger.end] != trigger.text:
            raise DataError(f"trigger text {trigger.text!r} does not match passage at its offsets")
        if etype is None:
            raise DataError("record has a trigger but no event_type")
    args = []
    for a in rec.get("arguments") or []:
        start, end = int(a["start"]), int(a["end"])
        if not 0 <= start < end <= len(text):
            raise DataError(f"argument span ({start}, {end}) out of bounds for text of length {len(text)}")
        arg_text = a.get("text", text[start:end])
        if text[start:end] != arg_text:
            raise DataError(f"argument text {arg_text!r} does not match passage at ({start}, {end})")
        args.append(Argument(start, end, arg_text, a["role"]))
    if args and trigger is None:
        raise DataError("record has arguments but no trigger")
    if ontology is not None and etype is not None:
        if etype not in ontology.event_types:
            raise DataError(f"unknown event type {etype!r}")
        allowed = ontology.event_types[etype]
        for a in args:
            if a.role not in allowed:
                raise DataError(f"unknown role {a.role!r} for event type {etype!r}")
    try:
        return EventInstance(
            text=text,
            tokens=list(rec.get("tokens") or []),
            language=rec.get("language", ""),
            trigger=trigger,
            event_type=etype,
            arguments=args,
            doc_id=str(rec.get("doc_id", "")),
            sent_id=str(rec.get("sent_id", "")),
        )
    except CodecError as exc:
        raise DataError(str(exc)) from None


def instance_to_record(inst: EventInstance) -> dict:
    return {
        "doc_id": inst.doc_id,
        "sent_id": inst.sent_id,
        "language": inst.language,
        "text": inst.text,
        "tokens": inst.tokens,
        "trigger": None if inst.trigger is None else
        {"start": inst.trigger.start, "end": inst.trigger.end, "text": inst.trigger.text},
        "event_type": inst.event_type,
        "arguments": [{"start": a.start, "end": a.end, "text": a.text, "role": a.role} for a in inst.arguments],
    }


def load_jsonl(path: str | Path, ontology: Optional[EventOntology] = None) -> DatasetSplit:
    """Load and validate an instance file; errors name the offending line.

    One record per event; a record with ``trigger: null`` marks a sentence
    without events, so it counts toward sentences only.
    """
    path = Path(path)
    instances = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                instances.append(instance_from_record(rec, ontology))
            except (json.JSONDecodeError, KeyError, TypeError, DataError) as exc:
                raise DataError(f"{path}:{lineno}: {type(exc).__name__}: {exc}") from None
    langs = Counter(i.language for i in instances)
    language = langs.most_common(1)[0][0] if langs else ""
    return DatasetSplit(instances, language)


def _atomic_write(path: Path, lines: Iterable[str]) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for line in lines:
                fh.write(line + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_jsonl(instances: Iterable[EventInstance], path: str | Path) -> None:
    _atomic_write(Path(path), (json.dumps(instance_to_record(i), ensure_ascii=False) for i in instances))


# -- prediction files -------------------------------------------------------

@dataclass
class PredictionRecord:
    doc_id: str
    sent_id: str
    event_type: str
    trigger: Tuple[int, int]
    predictions: List[ArgumentPrediction] = field(default_factory=list)

    @property
    def key(self) -> Tuple[str, str, str, int, int]:
        return (self.doc_id, self.sent_id, self.event_type, self.trigger[0], self.trigger[1])

    @classmethod
    def for_instance(cls, inst: EventInstance, preds: Sequence[ArgumentPrediction]) -> "PredictionRecord":
        return cls(inst.doc_id, inst.sent_id, inst.event_type or "", (inst.trigger.start, inst.trigger.end), list(preds))


def prediction_to_dict(p: ArgumentPrediction) -> dict:
    start, end = p.span if p.span is not None else (None, None)
    return {"role": p.role, "text": p.text, "start": start, "end": end, "resolution": p.resolution}


def prediction_from_dict(d: Mapping) -> ArgumentPrediction:
    span = None if d.get("start") is None else (int(d["start"]), int(d["end"]))
    return ArgumentPrediction(d["role"], d["text"], span, d.get("resolution", UNRESOLVED if span is None else "exact"))


def write_predictions(records: Iterable[PredictionRecord], path: str | Path) -> None:
    def lines():
        for r in records:
            yield json.dumps({
                "doc_id": r.doc_id,
                "sent_id": r.sent_id,
                "event_type": r.event_type,
                "trigger": {"start": r.trigger[0], "end": r.trigger[1]},
                "predictions": [prediction_to_dict(p) for p in r.predictions],
            }, ensure_ascii=False)
    _atomic_write(Path(path), lines())


def read_predictions(path: str | Path) -> List[PredictionRecord]:
    out = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
                t = d.get("trigger") or {"start": -1, "end": -1}
                out.append(PredictionRecord(
                    str(d["doc_id"]), str(d["sent_id"]), d["event_type"], (int(t["start"]), int(t["end"])),
                    [prediction_from_dict(p) for p in d.get("predictions", [])],
                ))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    return out


# -- long-sentence splitting ------------------------------------------------

@dataclass(frozen=True)
class Portion:
    index: int
    char_delta: int
    token_delta: int
    char_length: int
    token_length: int


@dataclass
class PortionMap:
    portions: List[Portion]
    event_portion: Optional[int] = None
    dropped: List[Argument] = field(default_factory=list)
    original_length: int = 0
    original_tokens: int = 0

    def __getitem__(self, index: int) -> Portion:
        if not 0 <= index < len(self.portions):
            raise KeyError(f"unknown portion index {index}")
        return self.portions[index]


def _cut_points(tokens: List[str], trig: Optional[Tuple[int, int]], max_tokens: int) -> List[int]:
    n = len(tokens)
    limit = max_tokens - 1  # every portion must be strictly shorter than max_tokens
    cuts = []
    s = 0
    while n - s > limit:
        c = s + limit
        for j in range(s + limit, s + limit // 2, -1):
            if tokens[j - 1] and tokens[j - 1][-1] in PUNCT_BREAKS:
                c = j
                break
        if trig is not None and trig[0] < c < trig[1]:
            if trig[0] > s:
                c = trig[0]
            elif trig[1] - s <= limit:
                c = trig[1]
            else:
                raise DataError(f"trigger spans {trig[1] - trig[0]} tokens, too long for {max_tokens}-token portions")
        cuts.append(c)
        s = c
    return cuts


def split_long_sentence(instance: EventInstance, max_tokens: int = 80) -> Tuple[List[EventInstance], PortionMap]:
    """Cut a sentence into portions of fewer than ``max_tokens`` tokens.

    Cuts prefer a token ending in punctuation in the back half of the window
    and never fall inside the trigger. Only the portion holding the trigger
    carries the event; arguments not wholly inside it go to ``map.dropped``.
    """
    if max_tokens < 2:
        raise ValueError("max_tokens must be >= 2")
    tokens = instance.tokens
    spans = instance.token_char_spans()
    trig_tok = None
    if instance.trigger is not None:
        t = instance.trigger
        covered = [k for k, (a, b) in enumerate(spans) if a < t.end and b > t.start]
        if covered:
            trig_tok = (covered[0], covered[-1] + 1)
    cuts = _cut_points(tokens, trig_tok, max_tokens)
    bounds = [0, *cuts, len(tokens)]
    portions: List[EventInstance] = []
    entries: List[Portion] = []
    event_portion = None
    dropped: List[Argument] = []
    text = instance.text
    for idx, (a, b) in enumerate(zip(bounds, bounds[1:])):
        c0 = spans[a][0] if a > 0 else 0
        c1 = spans[b][0] if b < len(tokens) else len(text)
        piece = text[c0:c1]
        entries.append(Portion(idx, c0, a, c1 - c0, b - a))
        holds_event = (
            instance.trigger is not None and c0 <= instance.trigger.start and instance.trigger.end <= c1
        )
        trigger = None
        args: List[Argument] = []
        if holds_event:
            event_portion = idx
            t = instance.trigger
            trigger = Span(t.start - c0, t.end - c0, t.text)
            for arg in instance.arguments:
                if c0 <= arg.start and arg.end <= c1:
                    args.append(Argument(arg.start - c0, arg.end - c0, arg.text, arg.role))
                else:
                    dropped.append(arg)
        portions.append(EventInstance(
            text=piece,
            tokens=list(tokens[a:b]),
            language=instance.language,
            trigger=trigger,
            event_type=instance.event_type if holds_event else None,
            arguments=args,
            doc_id=instance.doc_id,
            sent_id=f"{instance.sent_id}#{idx}",
        ))
    pmap = PortionMap(entries, event_portion, dropped, len(text), len(tokens))
    return portions, pmap


def merge_portion_predictions(
    portion_preds: Mapping[int, Sequence[ArgumentPrediction]], pmap: PortionMap
) -> List[ArgumentPrediction]:
    """Shift portion-local spans back into the original sentence."""
    merged: List[ArgumentPrediction] = []
    for idx in sorted(portion_preds):
        portion = pmap[idx]
        for p in portion_preds[idx]:
            if p.span is None:
                merged.append(p)
                continue
            s, e = p.span
            if not 0 <= s < e <= portion.char_length:
                raise DataError(f"prediction span {p.span} outside portion {idx}")
            merged.append(ArgumentPrediction(p.role, p.text, (s + portion.char_delta, e + portion.char_delta), p.resolution))
    return merged
