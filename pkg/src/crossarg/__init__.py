"""Template-based cross-lingual event argument extraction."""
from .codec import (
    Argument,
    ArgumentPrediction,
    EventInstance,
    RoleAssignments,
    Span,
    decode_target,
    encode_target,
    resolve_offsets,
)
from .data import DatasetSplit, load_jsonl, write_jsonl, write_predictions, read_predictions
from .estimator import ArgumentExtractor
from .evaluation import ScoreReport, aggregate_seeds, score
from .prompt import ModelInput, PromptConfig, build_input
from .templates import EventOntology, EventTemplate, get_template, load_ontology, render_empty, special_token_inventory

__version__ = "0.1.0"

__all__ = [
    "Argument",
    "ArgumentExtractor",
    "ArgumentPrediction",
    "DatasetSplit",
    "EventInstance",
    "EventOntology",
    "EventTemplate",
    "ModelInput",
    "PromptConfig",
    "RoleAssignments",
    "ScoreReport",
    "Span",
    "aggregate_seeds",
    "build_input",
    "decode_target",
    "encode_target",
    "get_template",
    "load_jsonl",
    "load_ontology",
    "read_predictions",
    "render_empty",
    "resolve_offsets",
    "score",
    "special_token_inventory",
    "write_jsonl",
    "write_predictions",
]
