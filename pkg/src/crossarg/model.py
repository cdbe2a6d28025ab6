"""Reference encoder-decoder backend and the copy-augmented generator."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol, Tuple

import torch
from torch import nn

from .copying import CopyGate, StepDistribution, mixture_log_probs, scatter_copy


@dataclass
class EncoderContext:
    memory: torch.Tensor  # [B, S, d]
    input_ids: torch.Tensor  # [B, S]
    pad_mask: torch.Tensor  # [B, S], True at padding


class GenerativeBackend(Protocol):
    """What the copy layer needs from any encoder-decoder model.

    ``decode`` returns vocabulary logits, last-layer cross-attention averaged
    over heads (rows sum to one over input positions), and the final decoder
    hidden states, all for every prefix position.
    """

    hidden_dim: int
    vocab_size: int

    def encode(self, input_ids: torch.Tensor, pad_mask: Optional[torch.Tensor] = None) -> EncoderContext: ...

    def decode(self, ctx: EncoderContext, prefix: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]: ...


class _EncoderLayer(nn.Module):
    def __init__(self, d, h, ff, dropout):
        super().__init__()
        self.ln1 = nn.LayerNorm(d)
        self.attn = nn.MultiheadAttention(d, h, dropout=dropout, batch_first=True)
        self.ln2 = nn.LayerNorm(d)
        self.ff = nn.Sequential(nn.Linear(d, ff), nn.GELU(), nn.Linear(ff, d))
        self.drop = nn.Dropout(dropout)

    def forward(self, x, pad_mask):
        y = self.ln1(x)
        y, _ = self.attn(y, y, y, key_padding_mask=pad_mask, need_weights=False)
        x = x + self.drop(y)
        return x + self.drop(self.ff(self.ln2(x)))


class _DecoderLayer(nn.Module):
    def __init__(self, d, h, ff, dropout):
        super().__init__()
        self.ln1 = nn.LayerNorm(d)
        self.self_attn = nn.MultiheadAttention(d, h, dropout=dropout, batch_first=True)
        self.ln2 = nn.LayerNorm(d)
        self.cross_attn = nn.MultiheadAttention(d, h, dropout=dropout, batch_first=True)
        self.ln3 = nn.LayerNorm(d)
        self.ff = nn.Sequential(nn.Linear(d, ff), nn.GELU(), nn.Linear(ff, d))
        self.drop = nn.Dropout(dropout)

    def forward(self, x, memory, mem_pad_mask, causal, want_weights=False):
        y = self.ln1(x)
        y, _ = self.self_attn(y, y, y, attn_mask=causal, need_weights=False)
        x = x + self.drop(y)
        y = self.ln2(x)
        y, weights = self.cross_attn(
            y, memory, memory, key_padding_mask=mem_pad_mask,
            need_weights=want_weights, average_attn_weights=True,
        )
        x = x + self.drop(y)
        x = x + self.drop(self.ff(self.ln3(x)))
        return x, weights


class ToyTransformer(nn.Module):
    """Small pre-norm encoder-decoder with learned positions.

    Encoder and decoder share one token embedding table; the output
    projection is untied so tokens never seen as targets stay improbable
    under the plain generator.
    """

    def __init__(
        self,
        vocab_size: int,
        d_model: int = 64,
        num_heads: int = 4,
        num_layers: int = 2,
        ff_dim: int = 256,
        max_positions: int = 256,
        dropout: float = 0.0,
        pad_id: int = 0,
    ):
        super().__init__()
        self.vocab_size = vocab_size
        self.hidden_dim = d_model
        self.max_positions = max_positions
        self.pad_id = pad_id
        self.embed = nn.Embedding(vocab_size, d_model)
        self.src_pos = nn.Embedding(max_positions, d_model)
        self.tgt_pos = nn.Embedding(max_positions, d_model)
        self.encoder = nn.ModuleList(_EncoderLayer(d_model, num_heads, ff_dim, dropout) for _ in range(num_layers))
        self.decoder = nn.ModuleList(_DecoderLayer(d_model, num_heads, ff_dim, dropout) for _ in range(num_layers))
        self.enc_norm = nn.LayerNorm(d_model)
        self.dec_norm = nn.LayerNorm(d_model)
        self.out = nn.Linear(d_model, vocab_size)
        nn.init.normal_(self.embed.weight, std=0.3)
        nn.init.normal_(self.src_pos.weight, std=0.3)
        nn.init.normal_(self.tgt_pos.weight, std=0.3)

    def encode(self, input_ids: torch.Tensor, pad_mask: Optional[torch.Tensor] = None) -> EncoderContext:
        if input_ids.shape[1] > self.max_positions:
            raise ValueError(f"input length {input_ids.shape[1]} exceeds {self.max_positions} positions")
        if pad_mask is None:
            pad_mask = torch.zeros_like(input_ids, dtype=torch.bool)
        pos = torch.arange(input_ids.shape[1], device=input_ids.device)
        x = self.embed(input_ids) + self.src_pos(pos)
        for layer in self.encoder:
            x = layer(x, pad_mask)
        return EncoderContext(self.enc_norm(x), input_ids, pad_mask)

    def decode(self, ctx: EncoderContext, prefix: torch.Tensor):
        T = prefix.shape[1]
        if T > self.max_positions:
            raise ValueError(f"prefix length {T} exceeds {self.max_positions} positions")
        pos = torch.arange(T, device=prefix.device)
        x = self.embed(prefix) + self.tgt_pos(pos)
        causal = torch.triu(torch.ones(T, T, dtype=torch.bool, device=prefix.device), 1)
        weights = None
        last = len(self.decoder) - 1
        for i, layer in enumerate(self.decoder):
            x, w = layer(x, ctx.memory, ctx.pad_mask, causal, want_weights=(i == last))
            if w is not None:
                weights = w
        hidden = self.dec_norm(x)
        return self.out(hidden), weights, hidden


class CopySeq2Seq(nn.Module):
    """A generative backend plus (optionally) the copy gate."""

    def __init__(self, backend: nn.Module, copy: bool = True, floor: float = 1e-12):
        super().__init__()
        self.backend = backend
        self.copy = copy
        self.floor = floor
        self.gate = CopyGate(backend.hidden_dim) if copy else None

    def encode(self, input_ids, pad_mask=None) -> EncoderContext:
        return self.backend.encode(input_ids, pad_mask)

    def components(self, ctx: EncoderContext, prefix: torch.Tensor):
        logits, attn, hidden = self.backend.decode(ctx, prefix)
        w = self.gate(hidden) if self.gate is not None else None
        return logits, attn, w

    def log_probs(self, ctx: EncoderContext, prefix: torch.Tensor) -> torch.Tensor:
        """``log p_mix`` at every prefix position, ``[B, T, V]``."""
        logits, attn, w = self.components(ctx, prefix)
        return mixture_log_probs(logits, attn, w, ctx.input_ids, self.floor)

    def forward(self, input_ids, pad_mask, prefix):
        return self.log_probs(self.encode(input_ids, pad_mask), prefix)

    def step_distribution(self, ctx: EncoderContext, prefix: torch.Tensor) -> StepDistribution:
        """Full mixture components at the last position of a single prefix."""
        logits, attn, w = self.components(ctx, prefix)
        p_gen = torch.softmax(logits[0, -1], -1)
        p_copy = scatter_copy(attn[0, -1:], ctx.input_ids[0], logits.shape[-1])[0]
        w_val = float(w[0, -1]) if w is not None else 0.0
        if w is None:
            p_mix = p_gen
        else:
            p_mix = w[0, -1] * p_copy + (1 - w[0, -1]) * p_gen
        return StepDistribution(p_gen, p_copy, w_val, p_mix)
