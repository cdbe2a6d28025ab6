"""Scikit-learn style estimator around the full extraction pipeline."""
from __future__ import annotations

import importlib
import logging
from typing import Callable, Iterable, List, Optional, Sequence

import torch
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .codec import ArgumentPrediction, EventInstance, decode_target, encode_target, resolve_offsets
from .copying import StepDistribution
from .decoding import AllowedSet, DecodeResult, allowed_token_set, beam_search, greedy_decode
from .evaluation import score as score_predictions
from .model import CopySeq2Seq, ToyTransformer
from .prompt import EVENT_TYPE_MODES, ModelInput, PromptConfig, build_input, event_type_special_token
from .templates import SEP_TOKEN, TemplateRegistry
from .tokenizer import SubwordTokenizer
from .training import Example, TrainConfig, TrainLog, make_example, train_model
from .validation import check_choice, check_covered, check_instances, check_ontology, check_template_style

logger = logging.getLogger(__name__)

START_MODES = ("pad", "language")
DTYPES = {"float32": torch.float32, "float64": torch.float64}


def language_start_token(language: str) -> str:
    return f"<2{language}>"


class ArgumentExtractor(BaseEstimator):
    """Template-filling argument extractor with an optional copy mechanism.

    ``fit`` takes event instances (gold arguments included); ``predict``
    returns, per instance, a list of :class:`ArgumentPrediction` resolved to
    passage offsets. All randomness derives from ``seed``.
    """

    def __init__(
        self,
        ontology=None,
        template_style: str = "special_tokens",
        role_order_seed: Optional[int] = None,
        event_type_mode: str = "none",
        translation_table=None,
        copy: bool = True,
        backend: str = "toy",
        d_model: int = 64,
        num_heads: int = 4,
        num_layers: int = 2,
        ff_dim: int = 256,
        max_positions: int = 256,
        dropout: float = 0.0,
        num_merges: int = 8000,
        learning_rate: float = 1e-4,
        batch_size: int = 8,
        epochs: int = 60,
        max_steps: Optional[int] = None,
        beam_width: int = 1,
        constrained: bool = False,
        max_len: int = 64,
        start_token_mode: str = "pad",
        languages: Optional[Sequence[str]] = None,
        dtype: str = "float32",
        seed: int = 0,
    ):
        self.ontology = ontology
        self.template_style = template_style
        self.role_order_seed = role_order_seed
        self.event_type_mode = event_type_mode
        self.translation_table = translation_table
        self.copy = copy
        self.backend = backend
        self.d_model = d_model
        self.num_heads = num_heads
        self.num_layers = num_layers
        self.ff_dim = ff_dim
        self.max_positions = max_positions
        self.dropout = dropout
        self.num_merges = num_merges
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.max_steps = max_steps
        self.beam_width = beam_width
        self.constrained = constrained
        self.max_len = max_len
        self.start_token_mode = start_token_mode
        self.languages = languages
        self.dtype = dtype
        self.seed = seed

    # -- setup --------------------------------------------------------------
    def _validate_params(self) -> None:
        check_template_style(self.template_style)
        check_choice("event_type_mode", self.event_type_mode, EVENT_TYPE_MODES)
        check_choice("start_token_mode", self.start_token_mode, START_MODES)
        check_choice("dtype", self.dtype, DTYPES)
        if self.event_type_mode == "translated_tokens" and self.translation_table is None:
            raise ValueError("event_type_mode='translated_tokens' requires translation_table")
        if self.beam_width < 1 or self.max_len < 1:
            raise ValueError("beam_width and max_len must be >= 1")
        if self.backend != "toy" and not str(self.backend).startswith("external:"):
            raise ValueError("backend must be 'toy' or 'external:module:callable'")

    def _reserved_tokens(self, languages: Iterable[str]) -> List[str]:
        tokens = sorted(self.registry_.inventory())
        tokens.append(SEP_TOKEN)
        if self.event_type_mode == "special_tokens":
            tokens += [event_type_special_token(e) for e in self.ontology_.event_types]
        if self.start_token_mode == "language":
            tokens += [language_start_token(lang) for lang in sorted(set(languages))]
        return list(dict.fromkeys(tokens))

    def _start_id(self, language: str) -> int:
        tok = self.tokenizer_
        if self.start_token_mode == "pad":
            return tok.pad_id
        token = language_start_token(language)
        if token not in tok.token_to_id:
            raise ValueError(f"no start token registered for language {language!r}")
        return tok.token_to_id[token]

    # -- sklearn API --------------------------------------------------------
    def fit(self, X, y=None, vocab_texts: Optional[Iterable[str]] = None):
        """Train on gold instances.

        ``vocab_texts`` are extra unlabeled strings used only to learn the
        subword vocabulary, standing in for a multilingual pretrained one.
        """
        self._validate_params()
        instances = check_instances(X)
        self.ontology_ = check_ontology(self.ontology)
        check_covered(instances, self.ontology_)
        self.registry_ = TemplateRegistry(self.ontology_, self.template_style, self.role_order_seed)
        self.prompt_config_ = PromptConfig(self.event_type_mode, self.translation_table)
        pairs = [(self.build_input(i), encode_target(i, self.registry_[i.event_type])) for i in instances]
        languages = [i.language for i in instances] + list(self.languages or [])
        vocab_texts = list(vocab_texts or [])
        self.tokenizer_ = SubwordTokenizer.train(
            [p.text for p, _ in pairs] + [t for _, t in pairs] + vocab_texts,
            reserved=self._reserved_tokens(languages),
            num_merges=self.num_merges,
        )
        torch.manual_seed(self.seed)
        self.model_ = self._build_model()
        examples = self._examples(instances, pairs)
        config = TrainConfig(self.learning_rate, self.batch_size, self.epochs, self.seed, max_steps=self.max_steps)
        self.log_: TrainLog = train_model(self.model_, examples, config, self.tokenizer_.pad_id)
        return self

    def _backend_factory(self) -> Callable:
        if self.backend == "toy":
            return ToyTransformer
        target = self.backend[len("external:"):]
        module, _, attr = target.partition(":")
        if not module or not attr:
            raise ValueError(f"malformed backend selector {self.backend!r}")
        return getattr(importlib.import_module(module), attr)

    def _build_model(self) -> CopySeq2Seq:
        # external factories receive the same keyword arguments as the toy model
        backend = self._backend_factory()(
            self.tokenizer_.vocab_size,
            d_model=self.d_model,
            num_heads=self.num_heads,
            num_layers=self.num_layers,
            ff_dim=self.ff_dim,
            max_positions=self.max_positions,
            dropout=self.dropout,
            pad_id=self.tokenizer_.pad_id,
        )
        model = CopySeq2Seq(backend, copy=self.copy).to(DTYPES[self.dtype])
        model.eval()
        return model

    def _examples(self, instances: Sequence[EventInstance], pairs) -> List[Example]:
        return [
            make_example(p.text, t, self.tokenizer_, self._start_id(i.language), self.max_positions)
            for i, (p, t) in zip(instances, pairs)
        ]

    def build_input(self, instance: EventInstance) -> ModelInput:
        return build_input(instance, self.registry_[instance.event_type], self.prompt_config_)

    def training_pairs(self, X) -> List[tuple]:
        check_is_fitted(self, "model_")
        return [(self.build_input(i), encode_target(i, self.registry_[i.event_type])) for i in check_instances(X)]

    # -- decoding -----------------------------------------------------------
    def special_ids(self) -> set:
        tok = self.tokenizer_
        return {tok.token_to_id[t] for t in self.registry_.inventory() if t in tok.token_to_id}

    def banned_ids(self) -> set:
        tok = self.tokenizer_
        banned = {tok.pad_id}
        banned.update(i for t, i in tok.token_to_id.items() if t.startswith("<2") and t.endswith(">"))
        return banned

    def allowed_set(self, input_ids: Sequence[int]) -> AllowedSet:
        return allowed_token_set(input_ids, self.special_ids(), self.tokenizer_.eos_id)

    def decode_ids(
        self,
        instance: EventInstance,
        *,
        beam_width: Optional[int] = None,
        constrained: Optional[bool] = None,
        max_len: Optional[int] = None,
        step_hook: Optional[Callable[[StepDistribution], None]] = None,
    ) -> tuple:
        check_is_fitted(self, "model_")
        tok = self.tokenizer_
        beam_width = self.beam_width if beam_width is None else beam_width
        constrained = self.constrained if constrained is None else constrained
        max_len = self.max_len if max_len is None else max_len
        src = tok.encode(self.build_input(instance).text, add_eos=True)
        if len(src) > self.max_positions:
            src = src[: self.max_positions - 1] + [tok.eos_id]
        kwargs = dict(
            start_id=self._start_id(instance.language),
            eos_id=tok.eos_id,
            max_len=min(max_len, self.max_positions - 1),
            banned=self.banned_ids(),
            constraint=self.allowed_set(src) if constrained else None,
            step_hook=step_hook,
        )
        if beam_width == 1:
            result: DecodeResult = greedy_decode(self.model_, src, **kwargs)
        else:
            result = beam_search(self.model_, src, width=beam_width, **kwargs)
        return src, result

    def generate(self, X, **decode_kwargs) -> List[str]:
        out = []
        for inst in check_instances(X):
            _, result = self.decode_ids(inst, **decode_kwargs)
            out.append(self.tokenizer_.decode(result.ids, skip={self.tokenizer_.eos_id}))
        return out

    def predict(self, X, **decode_kwargs) -> List[List[ArgumentPrediction]]:
        instances = check_instances(X)
        outputs = self.generate(instances, **decode_kwargs)
        preds = []
        for inst, text in zip(instances, outputs):
            assignments = decode_target(text, self.registry_[inst.event_type])
            preds.append(resolve_offsets(assignments, inst))
        return preds

    def score(self, X, y=None, **decode_kwargs) -> float:
        """Argument classification F1 on ``X``."""
        instances = check_instances(X)
        report = score_predictions(self.predict(instances, **decode_kwargs), instances)
        return float(report.f1)

    # -- persistence --------------------------------------------------------
    def save(self, path) -> None:
        from .checkpoint import save_checkpoint

        save_checkpoint(self, path)

    @classmethod
    def load(cls, path, template_style: Optional[str] = None, override: bool = False) -> "ArgumentExtractor":
        from .checkpoint import load_checkpoint

        return load_checkpoint(path, template_style=template_style, override=override)
