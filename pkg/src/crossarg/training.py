"""Mini-batch training loop for :class:`~crossarg.model.CopySeq2Seq`."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import torch

from .copying import floor_hits, sequence_nll
from .model import CopySeq2Seq
from .tokenizer import SubwordTokenizer

logger = logging.getLogger(__name__)

# anything shaped like a template tag or bracket marker
_TAG_LIKE = re.compile(r"</?[A-Za-z][^<>\s]*>|\[[A-Za-z]+\]|<--[^<>\s]*-->")


@dataclass
class Example:
    src: List[int]
    tgt: List[int]
    start_id: int


@dataclass
class TrainConfig:
    learning_rate: float = 1e-4
    batch_size: int = 8
    epochs: int = 60
    seed: int = 0
    floor: float = 1e-12
    max_steps: Optional[int] = None


@dataclass
class TrainLog:
    epoch_loss: List[float] = field(default_factory=list)
    step_loss: List[float] = field(default_factory=list)
    floor_hits: int = 0
    steps: int = 0


def check_target(target: str, tokenizer: SubwordTokenizer) -> None:
    reserved = set(tokenizer.reserved)
    for m in _TAG_LIKE.finditer(target):
        if m.group() not in reserved:
            raise ValueError(f"target contains unregistered token {m.group()!r}")


def make_example(src_text: str, tgt_text: str, tokenizer: SubwordTokenizer, start_id: int, max_positions: int) -> Example:
    check_target(tgt_text, tokenizer)
    src = tokenizer.encode(src_text, add_eos=True)
    tgt = tokenizer.encode(tgt_text, add_eos=True)
    if tokenizer.unk_id in tgt:
        raise ValueError(f"target has characters outside the vocabulary: {tgt_text!r}")
    if len(src) > max_positions:
        logger.warning("input truncated from %d to %d tokens", len(src), max_positions)
        src = src[: max_positions - 1] + [tokenizer.eos_id]
    if len(tgt) > max_positions:
        raise ValueError(f"target of {len(tgt)} tokens exceeds {max_positions} positions")
    return Example(src, tgt, start_id)


def collate(batch: Sequence[Example], pad_id: int):
    S = max(len(e.src) for e in batch)
    T = max(len(e.tgt) for e in batch)
    src = torch.full((len(batch), S), pad_id, dtype=torch.long)
    tgt_in = torch.full((len(batch), T), pad_id, dtype=torch.long)
    tgt_out = torch.full((len(batch), T), pad_id, dtype=torch.long)
    for i, e in enumerate(batch):
        src[i, : len(e.src)] = torch.tensor(e.src)
        prefix = [e.start_id, *e.tgt[:-1]]
        tgt_in[i, : len(prefix)] = torch.tensor(prefix)
        tgt_out[i, : len(e.tgt)] = torch.tensor(e.tgt)
    src_pad = torch.zeros_like(src, dtype=torch.bool)
    tgt_mask = torch.zeros_like(tgt_out, dtype=torch.float)
    for i, e in enumerate(batch):
        src_pad[i, len(e.src):] = True
        tgt_mask[i, : len(e.tgt)] = 1.0
    return src, src_pad, tgt_in, tgt_out, tgt_mask


def batch_loss(model: CopySeq2Seq, batch: Sequence[Example], pad_id: int) -> Tuple[torch.Tensor, torch.Tensor, int]:
    """Summed NLL over all target tokens in ``batch`` and the token count."""
    src, src_pad, tgt_in, tgt_out, mask = collate(batch, pad_id)
    mask = mask.to(model.backend.out.weight.dtype)
    lp = model(src, src_pad, tgt_in)
    total = sequence_nll(lp, tgt_out, mask).sum()
    hits = floor_hits(lp.detach(), tgt_out, mask, model.floor) if model.copy else 0
    return total, mask.sum(), hits


def train_model(model: CopySeq2Seq, examples: Sequence[Example], config: TrainConfig, pad_id: int) -> TrainLog:
    if not examples:
        raise ValueError("empty training set")
    gen = torch.Generator().manual_seed(config.seed)
    opt = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    log = TrainLog()
    model.train()
    for epoch in range(config.epochs):
        order = torch.randperm(len(examples), generator=gen).tolist()
        ep_loss = 0.0
        ep_tokens = 0.0
        for b in range(0, len(order), config.batch_size):
            batch = [examples[i] for i in order[b: b + config.batch_size]]
            total, ntok, hits = batch_loss(model, batch, pad_id)
            loss = total / ntok
            opt.zero_grad()
            loss.backward()
            opt.step()
            log.steps += 1
            log.floor_hits += hits
            log.step_loss.append(loss.item())
            ep_loss += total.item()
            ep_tokens += ntok.item()
            if config.max_steps is not None and log.steps >= config.max_steps:
                break
        log.epoch_loss.append(ep_loss / ep_tokens)
        logger.debug("epoch %d loss %.5f", epoch + 1, log.epoch_loss[-1])
        if config.max_steps is not None and log.steps >= config.max_steps:
            break
    if log.floor_hits:
        logger.warning("%d gold tokens were clamped to the probability floor", log.floor_hits)
    model.eval()
    return log
