"""Single-file checkpoints for a fitted :class:`ArgumentExtractor`."""
from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Optional

import torch

from .templates import EventOntology, TemplateRegistry
from .prompt import PromptConfig
from .tokenizer import SubwordTokenizer
from .training import TrainLog

FORMAT = "crossarg-checkpoint"
VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(est, path) -> None:
    from sklearn.utils.validation import check_is_fitted

    check_is_fitted(est, "model_")
    params = est.get_params()
    params["ontology"] = None
    table = params.pop("translation_table")
    payload = {
        "format": FORMAT,
        "version": VERSION,
        "params": params,
        "translation_table": None if table is None else [[k[0], k[1], v] for k, v in table.items()],
        "ontology": {"event_types": est.ontology_.to_dict(), "version": est.ontology_.version},
        "tokenizer": est.tokenizer_.to_dict(),
        "state_dict": est.model_.state_dict(),
        "train_log": {
            "epoch_loss": est.log_.epoch_loss,
            "floor_hits": est.log_.floor_hits,
            "steps": est.log_.steps,
        },
    }
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        torch.save(payload, tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path, template_style: Optional[str] = None, override: bool = False):
    """Rebuild a fitted estimator.

    Passing a ``template_style`` different from the training one is refused
    unless ``override`` is set.
    """
    from .estimator import ArgumentExtractor

    payload = torch.load(path, map_location="cpu", weights_only=False)
    if not isinstance(payload, dict) or payload.get("format") != FORMAT:
        raise CheckpointError(f"{path} is not a {FORMAT} file")
    if payload.get("version") != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {payload.get('version')}")
    params = dict(payload["params"])
    trained_style = params["template_style"]
    if template_style is not None and template_style != trained_style:
        if not override:
            raise CheckpointError(
                f"checkpoint was trained with template style {trained_style!r}, not {template_style!r}"
            )
        params["template_style"] = template_style
    onto = payload["ontology"]
    ontology = EventOntology.from_dict(onto["event_types"], onto.get("version", ""))
    params["ontology"] = ontology
    table = payload.get("translation_table")
    params["translation_table"] = None if table is None else {(a, b): c for a, b, c in table}
    est = ArgumentExtractor(**params)
    est.ontology_ = ontology
    est.registry_ = TemplateRegistry(ontology, est.template_style, est.role_order_seed)
    est.prompt_config_ = PromptConfig(est.event_type_mode, est.translation_table)
    est.tokenizer_ = SubwordTokenizer.from_dict(payload["tokenizer"])
    est.model_ = est._build_model()
    est.model_.load_state_dict(payload["state_dict"])
    est.model_.eval()
    log = payload.get("train_log", {})
    est.log_ = TrainLog(epoch_loss=list(log.get("epoch_loss", [])), floor_hits=log.get("floor_hits", 0), steps=log.get("steps", 0))
    return est
