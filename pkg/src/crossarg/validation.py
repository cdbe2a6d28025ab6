"""Input validation helpers shared by the estimator and the CLI."""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, List, Union

from .codec import EventInstance
from .data import DatasetSplit
from .templates import TEMPLATE_STYLES, EventOntology, load_ontology


def check_instances(X, require_events: bool = True) -> List[EventInstance]:
    """Coerce ``X`` into a list of event instances.

    Accepts a :class:`DatasetSplit`, a single instance, or an iterable of
    instances. Sentences without a trigger are dropped.
    """
    if isinstance(X, DatasetSplit):
        items = X.instances
    elif isinstance(X, EventInstance):
        items = [X]
    elif isinstance(X, (str, bytes)):
        raise TypeError("expected event instances, got a string")
    else:
        try:
            items = list(X)
        except TypeError:
            raise TypeError(f"expected event instances, got {type(X).__name__}") from None
    for i, item in enumerate(items):
        if not isinstance(item, EventInstance):
            raise TypeError(f"element {i} is {type(item).__name__}, not EventInstance")
    events = [i for i in items if i.trigger is not None]
    if require_events and not events:
        raise ValueError("no event instances found")
    return events


def check_ontology(ontology: Union[EventOntology, str, Path, None]) -> EventOntology:
    if ontology is None:
        raise ValueError("an event ontology is required")
    if isinstance(ontology, EventOntology):
        return ontology
    if isinstance(ontology, dict):
        return EventOntology.from_dict(ontology)
    return load_ontology(ontology)


def check_choice(name: str, value, choices: Iterable) -> None:
    choices = tuple(choices)
    if value not in choices:
        raise ValueError(f"{name}={value!r}; expected one of {choices}")


def check_template_style(style: str) -> None:
    check_choice("template_style", style, TEMPLATE_STYLES)


def check_covered(instances: List[EventInstance], ontology: EventOntology) -> None:
    for inst in instances:
        if inst.event_type not in ontology.event_types:
            raise ValueError(f"event type {inst.event_type!r} not in ontology")
        roles = ontology.event_types[inst.event_type]
        for arg in inst.arguments:
            if arg.role not in roles:
                raise ValueError(f"role {arg.role!r} not defined for {inst.event_type!r}")
