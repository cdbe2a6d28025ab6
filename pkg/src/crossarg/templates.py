"""Event ontology and language-agnostic output templates."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

NONE_TOKEN = "[None]"
AND_TOKEN = "[and]"
SEP_TOKEN = "<SEP>"
EOS_TOKEN = "</s>"

SPECIAL_TOKENS = "special_tokens"
ENGLISH_TOKENS = "english_tokens"
TEMPLATE_STYLES = (SPECIAL_TOKENS, ENGLISH_TOKENS)


class OntologyError(ValueError):
    pass


@dataclass(frozen=True)
class EventOntology:
    event_types: Mapping[str, tuple[str, ...]]
    version: str = ""

    def __post_init__(self):
        for etype, roles in self.event_types.items():
            if not roles:
                raise OntologyError(f"event type {etype!r} has no roles")
            if len(set(roles)) != len(roles):
                raise OntologyError(f"duplicate role under event type {etype!r}")

    @classmethod
    def from_dict(cls, mapping: Mapping[str, Iterable[str]], version: str = "") -> "EventOntology":
        return cls({k: tuple(v) for k, v in mapping.items()}, version)

    def to_dict(self) -> dict[str, list[str]]:
        return {k: list(v) for k, v in self.event_types.items()}

    def roles(self) -> list[str]:
        """Distinct role names in first-seen order."""
        seen: dict[str, None] = {}
        for roles in self.event_types.values():
            for role in roles:
                seen.setdefault(role, None)
        return list(seen)

    def __contains__(self, event_type: str) -> bool:
        return event_type in self.event_types

    def __len__(self) -> int:
        return len(self.event_types)


def load_ontology(path: str | Path, version: str = "") -> EventOntology:
    """Read an ontology file of ``EventType<TAB>Role1,Role2,...`` lines.

    Blank lines and lines starting with ``#`` are skipped. Role order is kept
    exactly as listed.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"ontology file not found: {path}")
    event_types: dict[str, tuple[str, ...]] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if "\t" not in line:
                raise OntologyError(f"{path}:{lineno}: expected EventType<TAB>roles")
            etype, _, role_field = line.partition("\t")
            etype = etype.strip()
            roles = tuple(r.strip() for r in role_field.split(",") if r.strip())
            if etype in event_types:
                raise OntologyError(f"{path}:{lineno}: duplicate event type {etype!r}")
            if not roles:
                raise OntologyError(f"{path}:{lineno}: event type {etype!r} has an empty role list")
            if len(set(roles)) != len(roles):
                raise OntologyError(f"{path}:{lineno}: duplicate role under {etype!r}")
            event_types[etype] = roles
    return EventOntology(event_types, version or path.name)


def write_ontology(ontology: EventOntology, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for etype, roles in ontology.event_types.items():
            fh.write(f"{etype}\t{','.join(roles)}\n")


@dataclass(frozen=True)
class Slot:
    role: str
    open: str
    close: str


@dataclass(frozen=True)
class EventTemplate:
    event_type: str
    slots: tuple[Slot, ...]
    style: str = SPECIAL_TOKENS
    none_token: str = NONE_TOKEN
    and_token: str = AND_TOKEN
    sep_token: str = SEP_TOKEN

    @property
    def roles(self) -> list[str]:
        return [s.role for s in self.slots]

    def reserved_tokens(self) -> set[str]:
        """Tokens of this template that may not occur inside argument text."""
        tokens = {self.none_token, self.and_token, self.sep_token}
        if self.style == SPECIAL_TOKENS:
            for slot in self.slots:
                tokens.update((slot.open, slot.close))
        return tokens


def role_tokens(role: str) -> tuple[str, str]:
    # shared across event types: <Place> means the same thing everywhere
    return f"<{role}>", f"</{role}>"


def get_template(
    ontology: EventOntology,
    event_type: str,
    style: str = SPECIAL_TOKENS,
    role_order_seed: int | None = None,
) -> EventTemplate:
    if event_type not in ontology.event_types:
        raise KeyError(f"unknown event type {event_type!r}")
    if style not in TEMPLATE_STYLES:
        raise ValueError(f"unknown template style {style!r}; expected one of {TEMPLATE_STYLES}")
    roles = list(ontology.event_types[event_type])
    if role_order_seed is not None:
        # str seeds hash through sha512, so this is stable across processes
        random.Random(f"{role_order_seed}:{event_type}").shuffle(roles)
    if style == SPECIAL_TOKENS:
        slots = tuple(Slot(r, *role_tokens(r)) for r in roles)
    else:
        slots = tuple(Slot(r, f"{r}:", SEP_TOKEN) for r in roles)
    return EventTemplate(event_type, slots, style)


def render_slots(template: EventTemplate, contents: list[str]) -> str:
    if template.style == SPECIAL_TOKENS:
        return " ".join(f"{s.open} {c} {s.close}" for s, c in zip(template.slots, contents))
    return f" {template.sep_token} ".join(f"{s.open} {c}" for s, c in zip(template.slots, contents))


def render_empty(template: EventTemplate) -> str:
    return render_slots(template, [template.none_token] * len(template.slots))


def special_token_inventory(ontology: EventOntology, style: str = SPECIAL_TOKENS) -> set[str]:
    """Reserved tokens needed to write any target for ``ontology``.

    For the special-token style this is ``[None]``, ``[and]``, one open/close
    pair per distinct role, and the end-of-sequence marker.
    """
    tokens = {NONE_TOKEN, AND_TOKEN, EOS_TOKEN}
    if style == SPECIAL_TOKENS:
        for role in ontology.roles():
            tokens.update(role_tokens(role))
    else:
        tokens.add(SEP_TOKEN)
    return tokens


@dataclass
class TemplateRegistry:
    """Caches templates for one ontology, style, and role-order seed."""

    ontology: EventOntology
    style: str = SPECIAL_TOKENS
    role_order_seed: int | None = None
    _cache: dict[str, EventTemplate] = field(default_factory=dict, repr=False)

    def __getitem__(self, event_type: str) -> EventTemplate:
        if event_type not in self._cache:
            self._cache[event_type] = get_template(
                self.ontology, event_type, self.style, self.role_order_seed
            )
        return self._cache[event_type]

    def inventory(self) -> set[str]:
        return special_token_inventory(self.ontology, self.style)
