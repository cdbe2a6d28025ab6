"""Synthetic two-language corpus for desk-scale transfer experiments.

Both languages share sentence skeletons, role marker words, and the event
ontology; their trigger, filler, and argument words are drawn from disjoint
pseudo-word vocabularies (Latin-script syllables for the first language,
Cyrillic for the second). A model trained on one language can only fill
arguments in the other by copying them from the passage.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .codec import Argument, EventInstance, Span
from .data import DatasetSplit
from .templates import EventOntology

EVENT_NAMES = [
    "Life:Die", "Conflict:Attack", "Movement:Transport", "Transaction:Transfer-Ownership",
    "Contact:Meet", "Justice:Sue", "Personnel:Elect", "Business:Merge-Org",
]
ROLE_POOL = [
    "Agent", "Victim", "Instrument", "Place", "Attacker", "Target", "Artifact", "Origin",
    "Destination", "Buyer", "Seller", "Entity", "Person", "Plaintiff", "Defendant", "Org",
]
# shared skeleton words: one marker per role, plus a coordinator
MARKERS = [
    "by", "on", "with", "at", "from", "against", "of", "out", "to", "for", "via", "per",
    "upon", "near", "amid", "onto",
]
COORD = "and"
STOP = "."

SCRIPTS = {
    "latin": ("bcdfghjklmnprstvz", "aeiou"),
    "cyrillic": ("бвгджзклмнпрстфх", "аеиоуя"),
}


class SyntheticConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticConfig:
    num_event_types: int = 4
    roles_per_type: int = 3
    vocab_size_per_language: int = 60
    num_instances: int = 500
    num_test: int = 200
    languages: Tuple[str, str] = ("xa", "xb")
    scripts: Tuple[str, str] = ("latin", "cyrillic")
    triggers_per_type: int = 2
    fillers_per_language: int = 12
    multi_argument_prob: float = 0.1
    two_word_prob: float = 0.2
    seed: int = 0

    def validate(self) -> None:
        if not 1 <= self.num_event_types <= len(EVENT_NAMES):
            raise SyntheticConfigError(f"num_event_types must be in [1, {len(EVENT_NAMES)}]")
        if not 1 <= self.roles_per_type <= min(len(ROLE_POOL), len(MARKERS)):
            raise SyntheticConfigError("roles_per_type out of range")
        if self.languages[0] == self.languages[1]:
            raise SyntheticConfigError("the two languages need distinct tags")
        # a passage uses at most 4 arguments of up to 2+2 words each
        if self.vocab_size_per_language < 16:
            raise SyntheticConfigError("vocab_size_per_language too small for unique argument surfaces")
        for s in self.scripts:
            if s not in SCRIPTS:
                raise SyntheticConfigError(f"unknown script {s!r}")
        if self.num_instances < 0 or self.num_test < 0:
            raise SyntheticConfigError("instance counts must be non-negative")


def _pseudo_words(rng: random.Random, script: str, n: int, taken: set) -> List[str]:
    cons, vows = SCRIPTS[script]
    # syllable count grows with demand so the space never runs dry
    space = len(cons) * len(vows)
    words: List[str] = []
    attempts = 0
    while len(words) < n:
        attempts += 1
        if attempts > 200 * n + 1000:
            raise SyntheticConfigError("could not draw enough distinct pseudo-words")
        k = rng.choice((2, 3, 3)) if n < space else rng.choice((3, 3, 4))
        w = "".join(rng.choice(cons) + rng.choice(vows) for _ in range(k))
        if w not in taken and w not in MARKERS and w not in (COORD, STOP):
            taken.add(w)
            words.append(w)
    return words


@dataclass
class _Lexicon:
    arguments: List[str]
    fillers: List[str]
    triggers: Dict[str, List[str]]


def synthetic_ontology(config: SyntheticConfig) -> Tuple[EventOntology, Dict[str, str], Dict[str, List[str]]]:
    """The ontology, role -> marker word map, and per-type skeleton order."""
    rng = random.Random(f"ontology:{config.seed}")
    n_roles = min(len(ROLE_POOL), max(config.roles_per_type, config.num_event_types * config.roles_per_type // 2 + 1))
    roles = ROLE_POOL[:n_roles]
    markers = dict(zip(ROLE_POOL, MARKERS))
    types: Dict[str, Tuple[str, ...]] = {}
    for name in EVENT_NAMES[: config.num_event_types]:
        types[name] = tuple(rng.sample(roles, config.roles_per_type))
    skeleton = {name: list(rs) for name, rs in types.items()}
    return EventOntology(types, f"synthetic-{config.seed}"), {r: markers[r] for r in roles}, skeleton


def _lexicon(config: SyntheticConfig, ontology: EventOntology, which: int, taken: set) -> _Lexicon:
    rng = random.Random(f"lexicon:{config.seed}:{which}")
    script = config.scripts[which]
    args = _pseudo_words(rng, script, config.vocab_size_per_language, taken)
    fillers = _pseudo_words(rng, script, config.fillers_per_language, taken)
    triggers = {et: _pseudo_words(rng, script, config.triggers_per_type, taken) for et in ontology.event_types}
    return _Lexicon(args, fillers, triggers)


def _one_instance(
    rng: random.Random,
    lex: _Lexicon,
    event_type: str,
    roles: Sequence[str],
    markers: Dict[str, str],
    language: str,
    idx: int,
    multi_prob: float,
    two_word_prob: float,
) -> Optional[EventInstance]:
    k = rng.randint(1, min(4, len(roles)))
    present = set(rng.sample(list(roles), k))
    pool = list(lex.arguments)
    rng.shuffle(pool)
    n_args_left = 4
    words: List[str] = []
    arg_spans: List[Tuple[int, int, str]] = []  # (first word, last word + 1, role)
    if rng.random() < 0.5:
        words.append(rng.choice(lex.fillers))
    trigger_pos = len(words)
    words.append(rng.choice(lex.triggers[event_type]))
    remaining = len(present)
    for role in roles:
        if role not in present:
            continue
        count = 2 if rng.random() < multi_prob and n_args_left - remaining >= 1 else 1
        remaining -= 1
        words.append(markers[role])
        for c in range(count):
            if c:
                words.append(COORD)
            width = 2 if rng.random() < two_word_prob else 1
            begin = len(words)
            for _ in range(width):
                words.append(pool.pop())
            arg_spans.append((begin, len(words), role))
        n_args_left -= count
    words.append(STOP)

    text = " ".join(words)
    starts = []
    pos = 0
    for w in words:
        starts.append(pos)
        pos += len(w) + 1

    def char_span(a: int, b: int) -> Tuple[int, int]:
        return starts[a], starts[b - 1] + len(words[b - 1])

    ts, te = char_span(trigger_pos, trigger_pos + 1)
    arguments = []
    for a, b, role in arg_spans:
        s, e = char_span(a, b)
        surface = text[s:e]
        if text.count(surface) != 1:
            return None
        arguments.append(Argument(s, e, surface, role))
    return EventInstance(
        text=text,
        tokens=words,
        language=language,
        trigger=Span(ts, te, text[ts:te]),
        event_type=event_type,
        arguments=arguments,
        doc_id=f"synth-{language}",
        sent_id=str(idx),
    )


def _split(config: SyntheticConfig, which: int, n: int, stream: str) -> DatasetSplit:
    ontology, markers, skeleton = synthetic_ontology(config)
    taken: set = set()
    lexicons = [_lexicon(config, ontology, i, taken) for i in (0, 1)]
    lex = lexicons[which]
    language = config.languages[which]
    rng = random.Random(f"{stream}:{config.seed}:{which}")
    types = list(ontology.event_types)
    instances: List[EventInstance] = []
    while len(instances) < n:
        et = rng.choice(types)
        inst = _one_instance(
            rng, lex, et, skeleton[et], markers, language, len(instances),
            config.multi_argument_prob, config.two_word_prob,
        )
        if inst is not None:
            instances.append(inst)
    return DatasetSplit(instances, language)


def generate_corpus(config: SyntheticConfig) -> Tuple[DatasetSplit, DatasetSplit]:
    """(train in the first language, test in the second)."""
    config.validate()
    return _split(config, 0, config.num_instances, "train"), _split(config, 1, config.num_test, "test")


def generate_split(config: SyntheticConfig, language_index: int, num_instances: int, stream: str = "heldout") -> DatasetSplit:
    """Extra split in either language, drawn from an independent random stream."""
    config.validate()
    return _split(config, language_index, num_instances, stream)
