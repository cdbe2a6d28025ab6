"""Copy mechanism: gate, attention-to-vocabulary scatter, mixture, and loss.

The mixed next-token distribution is

    p_mix = w_copy * p_copy + (1 - w_copy) * p_gen

where ``w_copy`` comes from a sigmoid over an affine map of the decoder
hidden state and ``p_copy`` sums last-layer cross-attention onto the ids of
the attended input positions.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import torch
from torch import nn

logger = logging.getLogger(__name__)

NORM_TOL = 1e-6


class ZeroProbabilityError(ArithmeticError):
    """A gold token received exactly zero probability under the mixture."""


def _as_tensor(x, dtype=None) -> torch.Tensor:
    if isinstance(x, torch.Tensor):
        return x if dtype is None else x.to(dtype)
    return torch.as_tensor(x, dtype=dtype if dtype is not None else torch.float64)


class CopyGate(nn.Module):
    """``sigmoid(w . h + b)``: probability of copying at one decoder step."""

    def __init__(self, hidden_dim: int, zero_init: bool = False):
        super().__init__()
        self.hidden_dim = hidden_dim
        self.proj = nn.Linear(hidden_dim, 1)
        if zero_init:
            nn.init.zeros_(self.proj.weight)
            nn.init.zeros_(self.proj.bias)

    def forward(self, hidden: torch.Tensor) -> torch.Tensor:
        if hidden.shape[-1] != self.hidden_dim:
            raise ValueError(f"hidden dimension {hidden.shape[-1]} != gate dimension {self.hidden_dim}")
        return torch.sigmoid(self.proj(hidden)).squeeze(-1)


def copy_gate(hidden, gate: CopyGate) -> torch.Tensor:
    return gate(_as_tensor(hidden, gate.proj.weight.dtype))


def scatter_copy(attention: torch.Tensor, input_ids: torch.Tensor, vocab_size: int) -> torch.Tensor:
    """Batched scatter of attention ``[..., T, S]`` onto ids ``[..., S]``."""
    index = input_ids.unsqueeze(-2).expand(*attention.shape)
    out = attention.new_zeros(*attention.shape[:-1], vocab_size)
    return out.scatter_add(-1, index, attention)


def copy_distribution(attention, input_ids, vocab_size: int, tol: float = 1e-5) -> torch.Tensor:
    attention = _as_tensor(attention)
    input_ids = torch.as_tensor(input_ids, dtype=torch.long)
    if attention.shape[-1] != input_ids.shape[-1]:
        raise ValueError(f"attention length {attention.shape[-1]} != input length {input_ids.shape[-1]}")
    total = float(attention.sum())
    if abs(total - 1.0) > tol:
        raise ValueError(f"attention sums to {total}, not 1")
    if input_ids.numel() and (int(input_ids.max()) >= vocab_size or int(input_ids.min()) < 0):
        raise ValueError("input id outside vocabulary")
    return scatter_copy(attention.unsqueeze(0), input_ids, vocab_size).squeeze(0)


def mix_distributions(p_gen, p_copy, w_copy, tol: float = 1e-5) -> torch.Tensor:
    p_gen = _as_tensor(p_gen)
    p_copy = _as_tensor(p_copy, p_gen.dtype)
    w = float(w_copy)
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"w_copy={w} outside [0, 1]")
    for name, p in (("p_gen", p_gen), ("p_copy", p_copy)):
        s = float(p.sum())
        if abs(s - 1.0) > tol:
            raise ValueError(f"{name} sums to {s}, not 1")
    if w == 0.0:
        return p_gen.clone()
    if w == 1.0:
        return p_copy.clone()
    return w * p_copy + (1.0 - w) * p_gen


@dataclass
class StepDistribution:
    p_gen: torch.Tensor
    p_copy: torch.Tensor
    w_copy: float
    p_mix: torch.Tensor

    def check(self, tol: float = NORM_TOL) -> None:
        for name in ("p_gen", "p_copy", "p_mix"):
            s = float(getattr(self, name).double().sum())
            if abs(s - 1.0) > tol:
                raise AssertionError(f"{name} sums to {s!r}")
        if not 0.0 <= self.w_copy <= 1.0:
            raise AssertionError(f"w_copy={self.w_copy} outside [0, 1]")


@dataclass
class TrainingLoss:
    value: torch.Tensor
    per_step: List[torch.Tensor] = field(default_factory=list)
    floored: int = 0


def nll_loss(steps: Sequence[StepDistribution], gold: Sequence[int], floor: Optional[float] = None) -> TrainingLoss:
    """Sum of ``-log p_mix[gold]`` over steps.

    Without ``floor`` a zero-probability gold token raises; with it, the
    probability is clamped from below and the event is logged.
    """
    if len(steps) != len(gold):
        raise ValueError(f"{len(steps)} steps but {len(gold)} gold tokens")
    per_step = []
    floored = 0
    for i, (step, g) in enumerate(zip(steps, gold)):
        if not 0 <= g < step.p_mix.shape[-1]:
            raise ValueError(f"gold token {g} at step {i} outside vocabulary")
        p = step.p_mix[g]
        if float(p) <= 0.0:
            if floor is None:
                raise ZeroProbabilityError(f"gold token {g} has zero probability at step {i}")
            floored += 1
        if floor is not None:
            p = p.clamp_min(floor)
        per_step.append(-torch.log(p))
    if floored:
        logger.warning("%d gold token(s) hit the %.0e probability floor", floored, floor)
    value = torch.stack(per_step).sum() if per_step else torch.zeros(())
    return TrainingLoss(value, per_step, floored)


def mixture_log_probs(
    logits: torch.Tensor,
    attention: torch.Tensor,
    w_copy: Optional[torch.Tensor],
    input_ids: torch.Tensor,
    floor: float = 1e-12,
) -> torch.Tensor:
    """Log of the mixed distribution, batched over ``[..., T, V]``.

    ``w_copy=None`` disables copying, leaving the plain generator.
    """
    if w_copy is None:
        return torch.log_softmax(logits, dim=-1)
    p_gen = torch.softmax(logits, dim=-1)
    p_copy = scatter_copy(attention, input_ids, logits.shape[-1])
    w = w_copy.unsqueeze(-1)
    p_mix = w * p_copy + (1.0 - w) * p_gen
    return torch.log(p_mix.clamp_min(floor))


def sequence_nll(log_probs: torch.Tensor, gold: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Per-sequence summed token NLL for ``[B, T, V]`` log-probabilities."""
    tok = -log_probs.gather(-1, gold.unsqueeze(-1)).squeeze(-1)
    return (tok * mask).sum(-1)


def floor_hits(log_probs: torch.Tensor, gold: torch.Tensor, mask: torch.Tensor, floor: float = 1e-12) -> int:
    lp = log_probs.gather(-1, gold.unsqueeze(-1)).squeeze(-1)
    return int(((lp <= math.log(floor) + 1e-9) & mask.bool()).sum())
