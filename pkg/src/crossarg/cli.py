"""Command-line entry point: train, predict, evaluate, analyze, ablate, synth.

Exit codes: 0 success, 1 invalid configuration or input, 2 runtime failure.
Any path option may also be set through ``CROSSARG_<OPTION>`` (for example
``CROSSARG_TRAIN`` or ``CROSSARG_CHECKPOINT``).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__
from .analysis import classify_errors, error_report, failed_predictions, write_error_report
from .checkpoint import CheckpointError, load_checkpoint
from .codec import decode_target, resolve_offsets
from .data import DataError, PredictionRecord, load_jsonl, read_predictions, write_jsonl, write_predictions
from .estimator import ArgumentExtractor
from .evaluation import aggregate_seeds, format_pair_table, score, write_report
from .prompt import EVENT_TYPE_MODES, PromptError, load_translation_table
from .synthetic import SyntheticConfig, SyntheticConfigError, generate_corpus, generate_split, synthetic_ontology
from .templates import TEMPLATE_STYLES, OntologyError, load_ontology, write_ontology

logger = logging.getLogger("crossarg")

VALIDATION_ERRORS = (OntologyError, DataError, PromptError, CheckpointError, SyntheticConfigError, FileNotFoundError)
ABLATION_AXES = ("copy", "event_type_mode", "role_order", "template_style", "constrained")


class ValidationError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _env(name: str) -> Optional[str]:
    return os.environ.get(f"CROSSARG_{name.upper().replace('-', '_')}")


def _path_opt(p, flag: str, required: bool = False, **kw):
    dest = flag.lstrip("-").replace("-", "_")
    default = _env(dest)
    p.add_argument(flag, dest=dest, default=default, required=required and default is None, **kw)


def _on_off(value: str) -> bool:
    v = value.lower()
    if v in ("on", "true", "1", "yes"):
        return True
    if v in ("off", "false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected on/off, got {value!r}")


def _add_model_opts(p):
    p.add_argument("--template-style", choices=TEMPLATE_STYLES, default="special_tokens")
    p.add_argument("--event-type-mode", choices=EVENT_TYPE_MODES, default="none")
    _path_opt(p, "--translation-table", help="EventType<TAB>language<TAB>token file")
    p.add_argument("--role-order-seed", type=int, default=None)
    p.add_argument("--copy", type=_on_off, default=True, metavar="on|off")
    p.add_argument("--backend", default="toy", help="'toy' or 'external:module:callable'")
    p.add_argument("--start-token", choices=("pad", "language"), default="pad")
    p.add_argument("--d-model", type=int, default=64)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--epochs", type=int, default=60)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--vocab-corpus", nargs="*", default=[], help="instance or text files used only for the subword vocabulary")
    p.add_argument("--seed", type=int, default=0)


def _add_decode_opts(p):
    p.add_argument("--beam", type=int, default=1)
    p.add_argument("--max-len", type=int, default=64)
    p.add_argument("--constrained", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crossarg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="fit a model and write a checkpoint")
    _path_opt(p, "--train", required=True)
    _path_opt(p, "--ontology", required=True)
    _path_opt(p, "--checkpoint", required=True)
    _path_opt(p, "--loss-log")
    _add_model_opts(p)

    p = sub.add_parser("predict", help="decode an instance file into a prediction file")
    _path_opt(p, "--checkpoint", required=True)
    _path_opt(p, "--input", required=True)
    _path_opt(p, "--output", required=True)
    _path_opt(p, "--outputs-text", help="optional file of raw generated strings, one per line")
    p.add_argument("--template-style", choices=TEMPLATE_STYLES, default=None)
    p.add_argument("--force-style", action="store_true", help="decode even if the style differs from training")
    _add_decode_opts(p)

    p = sub.add_parser("evaluate", help="score a prediction file against gold")
    _path_opt(p, "--gold", required=True)
    _path_opt(p, "--pred", required=True)
    _path_opt(p, "--ontology")
    _path_opt(p, "--output")

    p = sub.add_parser("analyze", help="tag failed predictions by error category")
    _path_opt(p, "--gold", required=True)
    _path_opt(p, "--pred", required=True)
    _path_opt(p, "--reference-pred", help="predictions of a reference (monolingual) model")
    _path_opt(p, "--output", required=True)

    p = sub.add_parser("ablate", help="sweep one configuration axis and tabulate F1")
    _path_opt(p, "--train", required=True)
    env_tests = _env("test")
    p.add_argument("--test", nargs="+", required=env_tests is None,
                   default=env_tests.split(os.pathsep) if env_tests else None)
    _path_opt(p, "--ontology", required=True)
    _path_opt(p, "--output", required=True)
    p.add_argument("--axis", choices=ABLATION_AXES, required=True)
    p.add_argument("--values", nargs="*", default=None, help="axis values; defaults depend on the axis")
    p.add_argument("--seeds", type=int, default=3)
    _add_model_opts(p)
    _add_decode_opts(p)

    p = sub.add_parser("synth", help="write a synthetic two-language corpus")
    _path_opt(p, "--out", required=True)
    p.add_argument("--num-event-types", type=int, default=4)
    p.add_argument("--roles-per-type", type=int, default=3)
    p.add_argument("--vocab-size", type=int, default=60)
    p.add_argument("--num-instances", type=int, default=500)
    p.add_argument("--num-test", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    return parser


# -- helpers -----------------------------------------------------------------

def _need_file(path: Optional[str], what: str) -> Path:
    if path is None:
        raise ValidationError(f"missing {what}")
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"{what} not found: {p}")
    return p


def _vocab_texts(paths: List[str]) -> List[str]:
    texts: List[str] = []
    for path in paths:
        p = _need_file(path, "vocabulary corpus")
        if p.suffix == ".jsonl":
            texts += [i.text for i in load_jsonl(p).instances]
        else:
            texts += [line.strip() for line in p.read_text(encoding="utf-8").splitlines() if line.strip()]
    return texts


def _estimator(args, ontology, table, **overrides) -> ArgumentExtractor:
    params = dict(
        ontology=ontology,
        template_style=args.template_style,
        role_order_seed=args.role_order_seed,
        event_type_mode=args.event_type_mode,
        translation_table=table,
        copy=args.copy,
        backend=args.backend,
        d_model=args.d_model,
        num_layers=args.layers,
        num_heads=args.heads,
        dropout=args.dropout,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        epochs=args.epochs,
        max_steps=args.max_steps,
        start_token_mode=args.start_token,
        seed=args.seed,
    )
    for name in ("beam", "max_len", "constrained"):
        if hasattr(args, name):
            key = {"beam": "beam_width"}.get(name, name)
            params[key] = getattr(args, name)
    params.update(overrides)
    return ArgumentExtractor(**params)


def _validate_model_args(args):
    if args.event_type_mode == "translated_tokens" and not args.translation_table:
        raise ValidationError("--event-type-mode translated_tokens requires --translation-table")
    if args.backend != "toy" and not args.backend.startswith("external:"):
        raise ValidationError("--backend must be 'toy' or 'external:module:callable'")
    table = load_translation_table(_need_file(args.translation_table, "translation table")) if args.translation_table else None
    return table


# -- commands ----------------------------------------------------------------

def cmd_train(args, outputs: List[Path]) -> int:
    train_path = _need_file(args.train, "training file")
    ontology = load_ontology(_need_file(args.ontology, "ontology"))
    table = _validate_model_args(args)
    split = load_jsonl(train_path, ontology)
    vocab = _vocab_texts(args.vocab_corpus)
    est = _estimator(args, ontology, table)
    outputs.append(Path(args.checkpoint))
    est.fit(split, vocab_texts=vocab)
    est.save(args.checkpoint)
    if args.loss_log:
        outputs.append(Path(args.loss_log))
        Path(args.loss_log).write_text(
            "".join(f"{i + 1}\t{v:.6f}\n" for i, v in enumerate(est.log_.epoch_loss)), encoding="utf-8"
        )
    print(f"trained {est.log_.steps} steps; final epoch loss {est.log_.epoch_loss[-1]:.6f}")
    return 0


def _predict_records(est: ArgumentExtractor, split, args):
    events = split.events
    kwargs = dict(beam_width=args.beam, constrained=args.constrained, max_len=args.max_len)
    texts = est.generate(events, **kwargs) if events else []
    records = []
    for inst, text in zip(events, texts):
        preds = resolve_offsets(decode_target(text, est.registry_[inst.event_type]), inst)
        records.append(PredictionRecord.for_instance(inst, preds))
    return records, texts


def cmd_predict(args, outputs: List[Path]) -> int:
    ckpt = _need_file(args.checkpoint, "checkpoint")
    inp = _need_file(args.input, "input file")
    if args.beam < 1 or args.max_len < 1:
        raise ValidationError("--beam and --max-len must be >= 1")
    est = load_checkpoint(ckpt, template_style=args.template_style, override=args.force_style)
    split = load_jsonl(inp, est.ontology_)
    outputs.append(Path(args.output))
    records, texts = _predict_records(est, split, args)
    write_predictions(records, args.output)
    if args.outputs_text:
        outputs.append(Path(args.outputs_text))
        Path(args.outputs_text).write_text("".join(t + "\n" for t in texts), encoding="utf-8")
    print(f"wrote {len(records)} prediction records to {args.output}")
    return 0


def cmd_evaluate(args, outputs: List[Path]) -> int:
    ontology = load_ontology(_need_file(args.ontology, "ontology")) if args.ontology else None
    gold = load_jsonl(_need_file(args.gold, "gold file"), ontology)
    preds = {r.key: r.predictions for r in read_predictions(_need_file(args.pred, "prediction file"))}
    try:
        report = score(preds, gold)
    except KeyError as exc:
        raise ValidationError(exc.args[0]) from None
    print(report.summary())
    if args.output:
        outputs += [Path(args.output), Path(args.output + ".json")]
        write_report(report, args.output, title=f"{args.pred} vs {args.gold}")
    return 0


def cmd_analyze(args, outputs: List[Path]) -> int:
    gold = load_jsonl(_need_file(args.gold, "gold file"))
    preds = {r.key: r.predictions for r in read_predictions(_need_file(args.pred, "prediction file"))}
    refs = {}
    if args.reference_pred:
        refs = {r.key: r.predictions for r in read_predictions(_need_file(args.reference_pred, "reference predictions"))}
    failed, tags = [], []
    for inst in gold.events:
        for p in failed_predictions(preds.get(inst.key, []), inst):
            failed.append(p)
            tags.append(classify_errors(p, inst.arguments, inst, refs.get(inst.key)))
    dist = error_report(failed, tags)
    outputs += [Path(args.output), Path(args.output + ".json")]
    write_error_report(dist, args.output)
    for cat, (n, frac) in dist.items():
        print(f"{cat}\t{n}\t{float(frac):.3f}")
    return 0


def _axis_settings(axis: str, values: Optional[List[str]]):
    """(row label, estimator overrides, decode overrides) per axis value."""
    if axis == "copy":
        vals = values or ["on", "off"]
        return [(f"copy {v}", {"copy": _on_off(v)}, {}) for v in vals]
    if axis == "event_type_mode":
        vals = values or list(EVENT_TYPE_MODES)
        return [(f"event type: {v}", {"event_type_mode": v}, {}) for v in vals]
    if axis == "role_order":
        vals = values or ["none", "1", "2", "3"]
        return [("original order" if v == "none" else f"random order {v}",
                 {"role_order_seed": None if v == "none" else int(v)}, {}) for v in vals]
    if axis == "template_style":
        vals = values or list(TEMPLATE_STYLES)
        return [(v, {"template_style": v}, {}) for v in vals]
    vals = values or ["off", "on"]
    return [(f"constrained {v}", {}, {"constrained": _on_off(v)}) for v in vals]


def cmd_ablate(args, outputs: List[Path]) -> int:
    ontology = load_ontology(_need_file(args.ontology, "ontology"))
    table = _validate_model_args(args)
    if args.seeds < 1:
        raise ValidationError("--seeds must be >= 1")
    train = load_jsonl(_need_file(args.train, "training file"), ontology)
    tests = [load_jsonl(_need_file(t, "test file"), ontology) for t in args.test]
    settings = _axis_settings(args.axis, args.values)
    if args.axis == "event_type_mode" and "translated_tokens" in [s[1]["event_type_mode"] for s in settings] and table is None:
        raise ValidationError("translated_tokens in the sweep requires --translation-table")
    vocab = _vocab_texts(args.vocab_corpus)
    src = train.language
    rows, record = {}, {}
    trained = {}
    for label, est_over, dec_over in settings:
        cells = {}
        detail = {}
        for test in tests:
            reports = []
            for k in range(args.seeds):
                seed = args.seed + k
                key = (tuple(sorted(est_over.items())), seed)
                if key not in trained:
                    trained[key] = _estimator(args, ontology, table, seed=seed, **est_over).fit(train, vocab_texts=vocab)
                est = trained[key]
                kwargs = dict(beam_width=args.beam, constrained=args.constrained, max_len=args.max_len)
                kwargs.update(dec_over)
                reports.append(score(est.predict(test.events, **kwargs), test.events))
            mean = aggregate_seeds(reports)
            cells[(src, test.language)] = float(mean.f1)
            detail[f"{src} => {test.language}"] = [float(r.f1) for r in reports]
        rows[label] = cells
        record[label] = detail
    text = format_pair_table(rows)
    outputs += [Path(args.output), Path(args.output + ".json")]
    Path(args.output).write_text(f"# axis: {args.axis}; F1 averaged over {args.seeds} seed(s)\n{text}\n", encoding="utf-8")
    Path(args.output + ".json").write_text(json.dumps({"axis": args.axis, "seeds": args.seeds, "rows": record}, indent=2) + "\n")
    print(text)
    return 0


def cmd_synth(args, outputs: List[Path]) -> int:
    cfg = SyntheticConfig(
        num_event_types=args.num_event_types,
        roles_per_type=args.roles_per_type,
        vocab_size_per_language=args.vocab_size,
        num_instances=args.num_instances,
        num_test=args.num_test,
        seed=args.seed,
    )
    cfg.validate()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    train, test = generate_corpus(cfg)
    held = generate_split(cfg, 0, args.num_test)
    ontology = synthetic_ontology(cfg)[0]
    files = {"train.jsonl": train, "test_cross.jsonl": test, "test_in.jsonl": held}
    for name, split in files.items():
        outputs.append(out / name)
        write_jsonl(split.instances, out / name)
    outputs.append(out / "ontology.tsv")
    write_ontology(ontology, out / "ontology.tsv")
    print(f"wrote {', '.join(files)} and ontology.tsv to {out}")
    return 0


COMMANDS = {
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "analyze": cmd_analyze,
    "ablate": cmd_ablate,
    "synth": cmd_synth,
}


class _Tracker(list):
    """Output list that remembers which paths already existed."""

    def __init__(self, outputs: List[Path], existed: set):
        super().__init__()
        self._outputs = outputs
        self._existed = existed

    def append(self, path: Path) -> None:
        path = Path(path)
        if path.exists():
            self._existed.add(path)
        self._outputs.append(path)
        super().append(path)

    def __iadd__(self, paths):
        for p in paths:
            self.append(p)
        return self


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    outputs: List[Path] = []
    existed = set()
    code = 0
    try:
        code = COMMANDS[args.command](args, _Tracker(outputs, existed))
    except (ValidationError, *VALIDATION_ERRORS) as exc:
        print(f"crossarg {args.command}: error: {exc}", file=sys.stderr)
        code = 1
    except Exception as exc:  # noqa: BLE001 - single-line diagnostic by contract
        print(f"crossarg {args.command}: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = 2
    if code != 0:
        for path in outputs:
            if path not in existed and path.exists() and path.is_file():
                path.unlink()
    return code


if __name__ == "__main__":
    sys.exit(main())
