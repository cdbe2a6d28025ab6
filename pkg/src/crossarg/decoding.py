"""Greedy and beam decoding over the copy-augmented generator, with an
optional hard constraint that restricts every step to an allowed token set."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import torch

from .copying import StepDistribution
from .model import CopySeq2Seq, EncoderContext

logger = logging.getLogger(__name__)

NEG_INF = float("-inf")


@dataclass(frozen=True)
class AllowedSet:
    ids: frozenset
    eos_id: int

    def __post_init__(self):
        if not self.ids:
            raise ValueError("allowed set is empty")
        if self.eos_id not in self.ids:
            raise ValueError("allowed set must contain end-of-sequence")

    def __contains__(self, token_id: int) -> bool:
        return token_id in self.ids

    def __len__(self) -> int:
        return len(self.ids)

    def mask(self, vocab_size: int, device=None) -> torch.Tensor:
        m = torch.zeros(vocab_size, dtype=torch.bool, device=device)
        m[list(self.ids)] = True
        return m


def allowed_token_set(input_ids: Iterable[int], specials: Iterable[int], eos_id: int) -> AllowedSet:
    input_ids = list(input_ids)
    specials = set(specials)
    if not input_ids:
        raise ValueError("input must be nonempty")
    if not specials:
        raise ValueError("special-token set is empty; it must at least contain end-of-sequence")
    if eos_id not in specials:
        raise ValueError("special-token set must contain end-of-sequence")
    return AllowedSet(frozenset(input_ids) | frozenset(specials), eos_id)


def constrained_step(logits: torch.Tensor, allowed: AllowedSet) -> torch.Tensor:
    """Set every entry outside ``allowed`` to -inf; allowed entries pass through."""
    m = allowed.mask(logits.shape[-1], logits.device)
    return logits.masked_fill(~m, NEG_INF)


@dataclass
class BeamState:
    width: int
    hypotheses: List[Tuple[List[int], float]] = field(default_factory=list)

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("beam width must be >= 1")

    def prune(self, candidates: Sequence[Tuple[List[int], float]]) -> None:
        ranked = sorted(candidates, key=lambda c: -c[1])
        self.hypotheses = ranked[: self.width]


@dataclass
class DecodeResult:
    ids: List[int]
    score: float
    finished: bool
    step_scores: List[float] = field(default_factory=list)


StepHook = Callable[[StepDistribution], None]


class _Stepper:
    """Next-token log-probabilities for a batch of equal-length prefixes."""

    def __init__(
        self,
        model: CopySeq2Seq,
        input_ids: Sequence[int],
        start_id: int,
        banned: Iterable[int] = (),
        constraint: Optional[AllowedSet] = None,
        step_hook: Optional[StepHook] = None,
    ):
        self.model = model
        src = torch.tensor([list(input_ids)], dtype=torch.long)
        self.ctx = model.encode(src)
        self.start_id = start_id
        vocab = model.backend.vocab_size
        self.banned = torch.zeros(vocab, dtype=torch.bool)
        self.banned[list(banned)] = True
        self.constraint = constraint
        self.step_hook = step_hook

    def __call__(self, prefixes: List[List[int]]) -> torch.Tensor:
        k = len(prefixes)
        ctx = self.ctx
        if k > 1:
            ctx = EncoderContext(
                ctx.memory.expand(k, -1, -1), ctx.input_ids.expand(k, -1), ctx.pad_mask.expand(k, -1)
            )
        prefix = torch.tensor([[self.start_id, *p] for p in prefixes], dtype=torch.long)
        if self.step_hook is not None:
            for i in range(k):
                one = EncoderContext(ctx.memory[i:i + 1], ctx.input_ids[i:i + 1], ctx.pad_mask[i:i + 1])
                self.step_hook(self.model.step_distribution(one, prefix[i:i + 1]))
        lp = self.model.log_probs(ctx, prefix)[:, -1]
        lp = lp.masked_fill(self.banned, NEG_INF)
        if self.constraint is not None:
            lp = torch.log_softmax(constrained_step(lp, self.constraint), dim=-1)
        return lp


@torch.no_grad()
def greedy_decode(
    model: CopySeq2Seq,
    input_ids: Sequence[int],
    *,
    start_id: int,
    eos_id: int,
    max_len: int,
    banned: Iterable[int] = (),
    constraint: Optional[AllowedSet] = None,
    step_hook: Optional[StepHook] = None,
) -> DecodeResult:
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    step = _Stepper(model, input_ids, start_id, banned, constraint, step_hook)
    out: List[int] = []
    scores: List[float] = []
    for _ in range(max_len):
        lp = step([out])[0]
        tok = int(torch.argmax(lp))
        out.append(tok)
        scores.append(float(lp[tok]))
        if tok == eos_id:
            break
    finished = bool(out) and out[-1] == eos_id
    if not finished:
        logger.info("greedy decode truncated at max_len=%d", max_len)
    total = sum(scores)
    return DecodeResult(out, total / len(out), finished, scores)


@torch.no_grad()
def beam_search(
    model: CopySeq2Seq,
    input_ids: Sequence[int],
    *,
    width: int,
    start_id: int,
    eos_id: int,
    max_len: int,
    banned: Iterable[int] = (),
    constraint: Optional[AllowedSet] = None,
    step_hook: Optional[StepHook] = None,
) -> DecodeResult:
    """Beam search ranked by cumulative ``log p_mix`` divided by length.

    Search stops once ``width`` hypotheses have emitted end-of-sequence or at
    ``max_len``; in the latter case, with nothing finished, the best open
    hypothesis is returned with ``finished=False``.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    state = BeamState(width, [([], 0.0)])
    step = _Stepper(model, input_ids, start_id, banned, constraint, step_hook)
    finished: List[Tuple[List[int], float]] = []
    trace: dict = {(): []}
    for _ in range(max_len):
        prefixes = [h for h, _ in state.hypotheses]
        lp = step(prefixes)
        candidates = []
        for row, (hyp, score) in enumerate(state.hypotheses):
            top_lp, top_ids = torch.topk(lp[row], min(width, lp.shape[-1]))
            for v, tok in zip(top_lp.tolist(), top_ids.tolist()):
                if v == NEG_INF:
                    continue
                new = hyp + [tok]
                trace[tuple(new)] = trace[tuple(hyp)] + [v]
                candidates.append((new, score + v))
        candidates.sort(key=lambda c: -c[1])
        open_: List[Tuple[List[int], float]] = []
        for hyp, score in candidates:
            if hyp[-1] == eos_id:
                finished.append((hyp, score))
            else:
                open_.append((hyp, score))
            if len(open_) == width:
                break
        state.hypotheses = open_
        if len(finished) >= width or not open_:
            break
    if finished:
        hyp, score = max(finished, key=lambda c: c[1] / len(c[0]))
        done = True
    else:
        hyp, score = max(state.hypotheses, key=lambda c: c[1] / len(c[0]))
        done = False
        logger.info("beam search truncated at max_len=%d", max_len)
    return DecodeResult(hyp, score / len(hyp), done, trace[tuple(hyp)])
