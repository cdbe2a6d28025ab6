"""Serialization of gold arguments into target strings, and the reverse.

Targets follow the template layout: each slot holds its arguments joined by
``[and]`` or ``[None]`` when empty. Decoding is total: any string yields a
role assignment, with malformed slots left empty.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .templates import SPECIAL_TOKENS, EventTemplate, render_slots

RoleAssignments = Dict[str, List[str]]

EXACT = "exact"
NEAREST = "nearest_to_trigger"
UNRESOLVED = "unresolved"


class CodecError(ValueError):
    pass


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    text: str


@dataclass(frozen=True)
class Argument:
    start: int
    end: int
    text: str
    role: str


@dataclass
class EventInstance:
    """One passage with (optionally) one event and its gold arguments.

    Offsets are character offsets into ``text``. ``trigger`` is ``None`` for
    sentences that carry no event.
    """

    text: str
    tokens: List[str] = field(default_factory=list)
    language: str = ""
    trigger: Optional[Span] = None
    event_type: Optional[str] = None
    arguments: List[Argument] = field(default_factory=list)
    doc_id: str = ""
    sent_id: str = ""

    def __post_init__(self):
        if not self.tokens:
            self.tokens = self.text.split()
        n = len(self.text)
        spans = list(self.arguments)
        if self.trigger is not None:
            spans.append(self.trigger)
        for sp in spans:
            if not 0 <= sp.start < sp.end <= n:
                raise CodecError(f"span ({sp.start}, {sp.end}) out of bounds for text of length {n}")

    @property
    def key(self) -> Tuple[str, str, str, int, int]:
        t = self.trigger
        return (
            self.doc_id,
            self.sent_id,
            self.event_type or "",
            t.start if t else -1,
            t.end if t else -1,
        )

    def role_strings(self) -> RoleAssignments:
        """Gold arguments projected to role -> strings, in passage order."""
        out: RoleAssignments = {}
        for arg in sorted(self.arguments, key=lambda a: (a.start, a.end)):
            out.setdefault(arg.role, []).append(arg.text.strip())
        return out

    def token_char_spans(self) -> List[Tuple[int, int]]:
        """Character span of each token, found left to right in ``text``."""
        spans = []
        pos = 0
        for tok in self.tokens:
            i = self.text.find(tok, pos)
            if i < 0:
                raise CodecError(f"token {tok!r} not found in text after offset {pos}")
            spans.append((i, i + len(tok)))
            pos = i + len(tok)
        return spans


@dataclass(frozen=True)
class ArgumentPrediction:
    role: str
    text: str
    span: Optional[Tuple[int, int]] = None
    resolution: str = UNRESOLVED

    def __post_init__(self):
        if (self.span is None) != (self.resolution == UNRESOLVED):
            raise CodecError("span must be present exactly when the prediction is resolved")


def encode_target(instance: EventInstance, template: EventTemplate) -> str:
    by_role = instance.role_strings()
    unknown = set(by_role) - set(template.roles)
    if unknown:
        raise CodecError(f"roles {sorted(unknown)} not in template for {template.event_type!r}")
    reserved = template.reserved_tokens()
    for texts in by_role.values():
        for text in texts:
            for tok in reserved:
                if tok in text:
                    raise CodecError(f"argument text {text!r} contains reserved token {tok!r}")
    contents = [
        f" {template.and_token} ".join(by_role[r]) if by_role.get(r) else template.none_token
        for r in template.roles
    ]
    return render_slots(template, contents)


def _split_content(content: str, template: EventTemplate) -> List[str]:
    pieces = []
    for piece in content.split(template.and_token):
        piece = piece.replace(template.none_token, "").strip()
        if piece:
            pieces.append(piece)
    return pieces


def _decode_special(output: str, template: EventTemplate) -> RoleAssignments:
    tags = [t for s in template.slots for t in (s.open, s.close)]
    result: RoleAssignments = {}
    for slot in template.slots:
        result[slot.role] = []
        i = output.find(slot.open)
        if i < 0:
            continue
        begin = i + len(slot.open)
        j = output.find(slot.close, begin)
        if j < 0:
            continue
        content = output[begin:j]
        if any(t in content for t in tags):
            continue
        result[slot.role] = _split_content(content, template)
    return result


def _decode_english(output: str, template: EventTemplate) -> RoleAssignments:
    result: RoleAssignments = {}
    for slot in template.slots:
        result[slot.role] = []
        m = re.search(r"(?:^|(?<=\s)|(?<=%s))%s" % (re.escape(template.sep_token), re.escape(slot.open)), output)
        if m is None:
            continue
        rest = output[m.end():]
        j = rest.find(template.sep_token)
        content = rest if j < 0 else rest[:j]
        result[slot.role] = _split_content(content, template)
    return result


def decode_target(output: str, template: EventTemplate) -> RoleAssignments:
    if template.style == SPECIAL_TOKENS:
        return _decode_special(output, template)
    return _decode_english(output, template)


def _occurrences(text: str, sub: str) -> List[int]:
    out = []
    i = text.find(sub)
    while i >= 0:
        out.append(i)
        i = text.find(sub, i + 1)
    return out


def resolve_offsets(assignments: RoleAssignments, instance: EventInstance) -> List[ArgumentPrediction]:
    """Map predicted strings onto character spans of the passage.

    A unique occurrence is ``exact``; several occurrences are ranked by
    distance from the trigger start (leftmost wins ties) and the k-th repeat
    of a string under one role takes the k-th ranked occurrence.
    """
    anchor = instance.trigger.start if instance.trigger is not None else 0
    preds: List[ArgumentPrediction] = []
    for role, texts in assignments.items():
        seen: Dict[str, int] = {}
        for text in texts:
            if not text:
                continue
            k = seen.get(text, 0)
            seen[text] = k + 1
            starts = _occurrences(instance.text, text)
            if not starts or k >= len(starts):
                preds.append(ArgumentPrediction(role, text))
                continue
            ranked = sorted(starts, key=lambda s: (abs(s - anchor), s))
            start = ranked[k]
            resolution = EXACT if len(starts) == 1 else NEAREST
            preds.append(ArgumentPrediction(role, text, (start, start + len(text)), resolution))
    return preds
