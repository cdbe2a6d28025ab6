"""Encoder input assembly: passage, trigger, optional event-type token, template."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Tuple

from .codec import EventInstance
from .templates import SEP_TOKEN, EventTemplate, render_empty

EVENT_TYPE_MODES = ("none", "english_tokens", "translated_tokens", "special_tokens")


class PromptError(ValueError):
    pass


def event_type_special_token(event_type: str) -> str:
    return f"<--{event_type.lower()}-->"


@dataclass(frozen=True)
class PromptConfig:
    event_type_mode: str = "none"
    translation_table: Optional[Mapping[Tuple[str, str], str]] = None
    separator_token: str = SEP_TOKEN

    def __post_init__(self):
        if self.event_type_mode not in EVENT_TYPE_MODES:
            raise PromptError(f"unknown event_type_mode {self.event_type_mode!r}")
        if self.event_type_mode == "translated_tokens" and self.translation_table is None:
            raise PromptError("translated_tokens mode requires a translation table")

    def event_type_token(self, event_type: str, language: str) -> Optional[str]:
        mode = self.event_type_mode
        if mode == "none":
            return None
        if mode == "english_tokens":
            return event_type
        if mode == "special_tokens":
            return event_type_special_token(event_type)
        try:
            return self.translation_table[(event_type, language)]
        except KeyError:
            raise PromptError(
                f"no translation for event type {event_type!r} in language {language!r}"
            ) from None


@dataclass(frozen=True)
class ModelInput:
    text: str
    passage_char_base: int = 0


def build_input(instance: EventInstance, template: EventTemplate, config: PromptConfig = PromptConfig()) -> ModelInput:
    if instance.trigger is None or not instance.trigger.text.strip():
        raise PromptError("instance has no trigger surface string")
    sep = config.separator_token
    parts = [instance.text, sep, instance.trigger.text]
    token = config.event_type_token(template.event_type, instance.language)
    if token is not None:
        parts += [sep, token]
    parts += [sep, render_empty(template)]
    return ModelInput(" ".join(parts), 0)


def load_translation_table(path: str | Path) -> dict[Tuple[str, str], str]:
    """Read ``EventType<TAB>language<TAB>token`` lines."""
    table: dict[Tuple[str, str], str] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise PromptError(f"{path}:{lineno}: expected 3 tab-separated fields")
            etype, lang, token = (f.strip() for f in fields)
            table[(etype, lang)] = token
    return table
