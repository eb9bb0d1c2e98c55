"""dialogue-bt command line.

Every command reads a JSON config plus flag overrides, writes its artifacts under the
``--out`` directory, and prints one JSON summary line on stdout. Logs go to stderr.

Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 configuration error.
"""

import argparse
import json
import shutil
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from dialogue_bt.corpus.batching import truncate
from dialogue_bt.corpus.datasets import PairedCorpus
from dialogue_bt.corpus.filtering import filter_corpus
from dialogue_bt.corpus.retrieval import DEFAULT_PREFILTER_K, RetrievalIndex, retrieve_respond
from dialogue_bt.corpus.synthetic import synth_generate
from dialogue_bt.corpus.text import (
    detokenize,
    read_blocklist,
    read_mono,
    read_paired_tsv,
    tokenize,
    write_mono,
    write_paired_tsv,
)
from dialogue_bt.corpus.vocab import UNK, Vocab, build_vocab
from dialogue_bt.decoding import decode
from dialogue_bt.evaluation.model_metrics import adver_score, perplexity
from dialogue_bt.evaluation.novelty import novelty_rates
from dialogue_bt.evaluation.report import emit_report, export_table, load_report, text_metrics
from dialogue_bt.exceptions import ConfigError, DialogueBTError, RejectedInputError
from dialogue_bt.log import configure_logging, get_logger
from dialogue_bt.models.results import IterationTrace, PhaseResult
from dialogue_bt.models.schemas import ModelConfig, RunConfig, load_run_config
from dialogue_bt.neural.discriminator import Discriminator
from dialogue_bt.neural.gradcheck import run_gradient_suite
from dialogue_bt.neural.language_model import LanguageModel
from dialogue_bt.neural.serialization import Model, load_model, save_model
from dialogue_bt.neural.seq2seq import FORWARD, Seq2SeqPair
from dialogue_bt.numcore.rng import DECODE_STREAM, INIT_STREAM, named_rng
from dialogue_bt.training.auxiliary import train_discriminator, train_language_model
from dialogue_bt.training.back_translation import run_bt
from dialogue_bt.training.trainer import init_train, multitask_train
from dialogue_bt.visualization.comparison import MetricsComparisonViz
from dialogue_bt.visualization.iteration_trace import IterationTraceViz
from dialogue_bt.workspace import (
    PreparedData,
    TokenPair,
    Workspace,
    write_json,
    write_token_lines,
    write_token_pairs,
)

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3

SPLIT_STREAM = "prepare-split"
GRADCHECK_SEEDS = 10

Handler = Callable[[argparse.Namespace, RunConfig, Workspace], dict[str, Any]]


# ============================================
# Argument parsing
# ============================================


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="JSON run configuration")
    common.add_argument("--seed", type=int, default=None, help="Seed for every random stream")
    common.add_argument("--out", default=None, help="Run directory (overrides output_dir)")
    common.add_argument("--log-level", default="INFO")
    common.add_argument("--log-json", action="store_true", help="Emit logs as JSON")
    return common


def _add_training_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-steps", type=int, default=None, help="Step cap per phase")


def _add_decode_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--strategy",
        choices=["greedy", "beam", "diverse_beam", "nucleus", "fused", "mmi"],
        default=None,
    )
    parser.add_argument("--beam", type=int, default=None, help="Beam width")
    parser.add_argument("--groups", type=int, default=None, help="Diverse beam groups")
    parser.add_argument("--alpha", type=float, default=None, help="Fusion weight of the seq2seq model")
    parser.add_argument("--nucleus-p", type=float, default=None)
    parser.add_argument("--mmi-lambda", type=float, default=None)
    parser.add_argument("--candidates", type=int, default=None, help="MMI candidate count")
    parser.add_argument("--model", default=None, help="Pair checkpoint (default: init/pair.ckpt)")
    parser.add_argument("--split", choices=["train", "valid", "test"], default="test")


def build_parser() -> argparse.ArgumentParser:
    """The top-level parser with one sub-command per pipeline stage."""
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="dialogue-bt",
        description="Diversify dialogue responses by back-translating unpaired monologue text.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("synth", parents=[common], help="Generate synthetic corpora")
    sub.add_parser("prepare", parents=[common], help="Tokenize, filter, split, build vocab")
    for name, text in (
        ("train-init", "Train both directions on paired data"),
        ("train-lm", "Train the fusion language model"),
        ("train-disc", "Train the relevance discriminator"),
        ("train-multitask", "Seq2seq plus autoencoder multi-task training"),
    ):
        _add_training_flags(sub.add_parser(name, parents=[common], help=text))

    bt = sub.add_parser("bt", parents=[common], help="Iterative back translation")
    bt.add_argument("--iterations", type=int, default=None)
    _add_training_flags(bt)

    _add_decode_flags(sub.add_parser("decode", parents=[common], help="Decode held-out contexts"))

    retrieve = sub.add_parser("retrieve", parents=[common], help="Retrieval baseline")
    retrieve.add_argument("--k", type=int, default=None, help="Prefilter size")
    retrieve.add_argument("--model", default=None)
    retrieve.add_argument("--split", choices=["train", "valid", "test"], default="test")

    ev = sub.add_parser("eval", parents=[common], help="Score generations")
    ev.add_argument("--hyp", required=True, help="context<TAB>response[<TAB>logprob] file")
    ev.add_argument("--ref", default=None, help="context<TAB>reference file")
    ev.add_argument("--system", default=None, help="Row name in the comparison table")
    ev.add_argument("--model", default=None, help="Pair checkpoint for test perplexity")

    gc = sub.add_parser("gradcheck", parents=[common], help="Finite-difference gradient checks")
    gc.add_argument("--seeds", type=int, default=GRADCHECK_SEEDS, help="Number of seeds")
    return parser


def config_overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Nested config overrides from the flags that were given."""
    overrides: dict[str, Any] = {}

    def put(section: str | None, key: str, value: Any) -> None:
        if value is None:
            return
        if section is None:
            overrides[key] = value
        else:
            overrides.setdefault(section, {})[key] = value

    seed = getattr(args, "seed", None)
    put(None, "seed", seed)
    put("trainer", "rng_seed", seed)
    put("decode", "rng_seed", seed)
    put(None, "output_dir", getattr(args, "out", None))
    put("trainer", "num_iterations", getattr(args, "iterations", None))
    put("trainer", "max_steps_per_phase", getattr(args, "max_steps", None))
    put("decode", "strategy", getattr(args, "strategy", None))
    put("decode", "beam_size", getattr(args, "beam", None))
    put("decode", "num_groups", getattr(args, "groups", None))
    put("decode", "fusion_alpha", getattr(args, "alpha", None))
    put("decode", "nucleus_p", getattr(args, "nucleus_p", None))
    put("decode", "mmi_lambda", getattr(args, "mmi_lambda", None))
    put("decode", "mmi_candidates", getattr(args, "candidates", None))
    return overrides


# ============================================
# Shared helpers
# ============================================


def _model_config(config: RunConfig, vocab: Vocab) -> ModelConfig:
    try:
        return ModelConfig(**{**config.model.model_dump(), "vocab_size": len(vocab)})
    except ValidationError as exc:
        raise ConfigError(f"vocabulary of {len(vocab)} is too small for a model: {exc}") from exc


def _load_checked(path: str | Path, kind: str, vocab: Vocab) -> Model:
    model, header = load_model(path, expected_kind=kind)
    if header.get("vocab_hash") != vocab.fingerprint():
        raise RejectedInputError(f"{path} was trained with a different vocabulary")
    return model


def _load_pair(path: str | Path, vocab: Vocab) -> Seq2SeqPair:
    pair = _load_checked(path, Seq2SeqPair.kind, vocab)
    assert isinstance(pair, Seq2SeqPair)
    return pair


def _split(data: PreparedData, name: str) -> tuple[PairedCorpus, list[TokenPair]]:
    corpus, tokens = {
        "train": (data.train, data.train_tokens),
        "valid": (data.valid, data.valid_tokens),
        "test": (data.test, data.test_tokens),
    }[name]
    if not len(corpus):
        raise RejectedInputError(f"the {name} split is empty; adjust the split fractions")
    return corpus, tokens


def _surface(vocab: Vocab, ids: Sequence[int]) -> str:
    return detokenize(vocab.decode(ids)) or UNK


def _phase_summary(result: PhaseResult, checkpoint: Path) -> dict[str, Any]:
    return {
        "phase": result.name,
        "steps": result.steps,
        "best_validation_loss": result.best_validation_loss,
        "stopped_early": result.stopped_early,
        "checkpoint": str(checkpoint),
    }


# ============================================
# Commands
# ============================================


def cmd_synth(args: argparse.Namespace, config: RunConfig, ws: Workspace) -> dict[str, Any]:
    """Write a synthetic diversity-gap corpus."""
    corpora = synth_generate(config.synth, config.seed)
    out = ws.stage("synth")
    ws.snapshot_config("synth", config)
    write_paired_tsv(out / "paired.tsv", corpora.pairs)
    write_mono(out / "mono.txt", corpora.monologues)
    write_json(out / "stats.json", corpora.to_dict())
    return corpora.to_dict()


def cmd_prepare(args: argparse.Namespace, config: RunConfig, ws: Workspace) -> dict[str, Any]:
    """Tokenize, filter the monologue corpus, split and build the vocabulary."""
    paths = config.corpus
    paired_path = paths.paired or ws.require("synth", "paired.tsv", hint="synth")
    mono_path = paths.mono or ws.require("synth", "mono.txt", hint="synth")

    pairs = [(tokenize(c), tokenize(r)) for c, r in read_paired_tsv(paired_path)]
    blocklist = list(config.filter.blocklist)
    if paths.blocklist:
        blocklist.extend(read_blocklist(paths.blocklist))
    filtered = filter_corpus(
        [tokenize(u) for u in read_mono(mono_path)],
        config.filter.model_copy(update={"blocklist": blocklist}),
    )

    rng = named_rng(config.seed, SPLIT_STREAM)
    order = [int(i) for i in rng.permutation(len(pairs))]
    n_test = int(round(len(pairs) * paths.test_fraction))
    n_valid = int(round(len(pairs) * paths.valid_fraction))
    test = [pairs[i] for i in order[:n_test]]
    valid = [pairs[i] for i in order[n_test : n_test + n_valid]]
    train = [pairs[i] for i in order[n_test + n_valid :]]
    if not train:
        raise RejectedInputError("no training pairs left after splitting")

    mono_order = [int(i) for i in rng.permutation(len(filtered.kept))]
    n_valid_mono = int(round(len(filtered.kept) * paths.valid_fraction))
    valid_mono = [filtered.kept[i] for i in mono_order[:n_valid_mono]]
    mono = [filtered.kept[i] for i in mono_order[n_valid_mono:]]
    if not mono:
        raise RejectedInputError("no monologue utterance survived filtering")

    vocab = build_vocab(
        [[c for c, _ in train], [r for _, r in train], mono], min_count=paths.min_count
    )

    out = ws.stage("data")
    ws.snapshot_config("data", config)
    write_token_pairs(out / "train.tsv", train)
    write_token_pairs(out / "valid.tsv", valid)
    write_token_pairs(out / "test.tsv", test)
    write_token_lines(out / "mono.txt", mono)
    write_token_lines(out / "mono_valid.txt", valid_mono)
    vocab.save(out / "vocab.tsv")
    write_json(out / "filter_stats.json", filtered.to_dict())
    logger.info("corpus_prepared", train=len(train), valid=len(valid), test=len(test), mono=len(mono))
    return {
        "train": len(train),
        "valid": len(valid),
        "test": len(test),
        "mono": len(mono),
        "mono_valid": len(valid_mono),
        "filter": filtered.stats,
        "vocab_size": len(vocab),
        "vocab_hash": vocab.fingerprint(),
    }


def cmd_train_init(args: argparse.Namespace, config: RunConfig, ws: Workspace) -> dict[str, Any]:
    """Train P_f and P_b jointly on the paired data."""
    data = ws.load_prepared()
    pair = Seq2SeqPair(_model_config(config, data.vocab), named_rng(config.seed, INIT_STREAM))
    result = init_train(pair, data.train, config.optim, config.trainer, data.valid)
    out = ws.stage("init")
    ws.snapshot_config("init", config)
    ckpt = save_model(out / "pair.ckpt", pair, data.vocab.fingerprint(), stage="init")
    write_json(out / "phase.json", result.to_dict())
    return _phase_summary(result, ckpt)


def cmd_train_lm(args: argparse.Namespace, config: RunConfig, ws: Workspace) -> dict[str, Any]:
    """Train the language model used by fused decoding."""
    data = ws.load_prepared()
    lm = LanguageModel(_model_config(config, data.vocab), named_rng(config.seed, INIT_STREAM))
    result = train_language_model(lm, data.mono, config.optim, config.trainer, data.valid_mono)
    out = ws.stage("lm")
    ws.snapshot_config("lm", config)
    ckpt = save_model(out / "lm.ckpt", lm, data.vocab.fingerprint(), stage="lm")
    write_json(out / "phase.json", result.to_dict())
    return _phase_summary(result, ckpt)


def cmd_train_disc(args: argparse.Namespace, config: RunConfig, ws: Workspace) -> dict[str, Any]:
    """Train the relevance discriminator behind the Adver metric."""
    data = ws.load_prepared()
    disc = Discriminator(_model_config(config, data.vocab), named_rng(config.seed, INIT_STREAM))
    result = train_discriminator(disc, data.train, config.optim, config.trainer, data.valid)
    out = ws.stage("disc")
    ws.snapshot_config("disc", config)
    ckpt = save_model(out / "disc.ckpt", disc, data.vocab.fingerprint(), stage="disc")
    write_json(out / "phase.json", result.to_dict())
    return _phase_summary(result, ckpt)


def cmd_bt(args: argparse.Namespace, config: RunConfig, ws: Workspace) -> dict[str, Any]:
    """Run back translation from the initialised pair."""
    data = ws.load_prepared()
    init_path = ws.require("init", "pair.ckpt", hint="train-init")
    pair = _load_pair(init_path, data.vocab)
    vocab_hash = data.vocab.fingerprint()

    out = ws.stage("bt")
    ws.snapshot_config("bt", config)
    shutil.copyfile(init_path, out / "iter0.ckpt")

    def on_iteration(k: int, current: Seq2SeqPair, trace: IterationTrace) -> None:
        save_model(out / f"iter{k}.ckpt", current, vocab_hash, stage="bt", iteration=k)
        trace.to_csv(out / "trace.csv")

    result = run_bt(
        pair,
        data.train,
        data.mono,
        config.optim,
        config.trainer,
        valid=data.valid,
        valid_mono=data.valid_mono,
        on_iteration=on_iteration,
    )
    result.trace.to_csv(out / "trace.csv")
    viz = IterationTraceViz()
    viz.write_html(viz.create_trace_chart(result.trace), out / "trace.html")
    write_json(out / "phases.json", [phase.to_dict() for phase in result.phases])

    iterations = len(result.trace) - 1
    return {
        "iterations": iterations,
        "stopped_early": result.stopped_early,
        "fwd_ppl": result.trace.fwd_ppl,
        "bwd_ppl": result.trace.bwd_ppl,
        "checkpoint": str(out / f"iter{iterations}.ckpt"),
    }


def cmd_train_multitask(
    args: argparse.Namespace, config: RunConfig, ws: Workspace
) -> dict[str, Any]:
    """Train the multi-task baseline from scratch."""
    data = ws.load_prepared()
    pair = Seq2SeqPair(_model_config(config, data.vocab), named_rng(config.seed, INIT_STREAM))
    result = multitask_train(
        pair,
        data.train,
        data.mono,
        config.trainer.mixing_ratio,
        config.optim,
        config.trainer,
        data.valid,
    )
    out = ws.stage("multitask")
    ws.snapshot_config("multitask", config)
    ckpt = save_model(out / "pair.ckpt", pair, data.vocab.fingerprint(), stage="multitask")
    write_json(out / "phase.json", result.to_dict())
    return _phase_summary(result, ckpt)


def cmd_decode(args: argparse.Namespace, config: RunConfig, ws: Workspace) -> dict[str, Any]:
    """Decode a held-out split with the configured strategy."""
    data = ws.load_prepared()
    vocab = data.vocab
    decode_cfg = config.decode
    model_path = args.model or ws.require("init", "pair.ckpt", hint="train-init")
    pair = _load_pair(model_path, vocab)

    lm = None
    if decode_cfg.strategy == "fused":
        lm_model = _load_checked(ws.require("lm", "lm.ckpt", hint="train-lm"), LanguageModel.kind, vocab)
        assert isinstance(lm_model, LanguageModel)
        lm = lm_model
    backward_pair = None
    if decode_cfg.strategy == "mmi":
        init_path = ws.path("init", "pair.ckpt")
        backward_pair = _load_pair(init_path, vocab) if init_path.exists() else pair

    corpus, tokens = _split(data, args.split)
    rng = named_rng(decode_cfg.rng_seed, DECODE_STREAM)
    rows: list[str] = []
    references: list[tuple[str, str]] = []
    total_logprob = 0.0
    for (ctx_ids, _), (ctx_tokens, gold_tokens) in zip(corpus.pairs, tokens):
        hyp = decode(pair, truncate(ctx_ids, pair.config.max_len), decode_cfg, rng, lm, backward_pair)
        context = detokenize(ctx_tokens)
        rows.append(f"{context}\t{_surface(vocab, hyp.content)}\t{float(hyp.logprob)!r}\n")
        references.append((context, detokenize(gold_tokens)))
        total_logprob += float(hyp.logprob)

    out = ws.stage("decode")
    ws.snapshot_config("decode", config)
    target = out / f"{decode_cfg.strategy}.tsv"
    target.write_text("".join(rows), encoding="utf-8")
    write_paired_tsv(out / "reference.tsv", references)
    logger.info("decoded", strategy=decode_cfg.strategy, count=len(rows), path=str(target))
    return {
        "strategy": decode_cfg.strategy,
        "count": len(rows),
        "mean_logprob": total_logprob / len(rows),
        "output": str(target),
        "reference": str(out / "reference.tsv"),
    }


def cmd_retrieve(args: argparse.Namespace, config: RunConfig, ws: Workspace) -> dict[str, Any]:
    """Answer held-out contexts with monologue utterances."""
    data = ws.load_prepared()
    model_path = args.model or ws.require("init", "pair.ckpt", hint="train-init")
    pair = _load_pair(model_path, data.vocab)
    index = RetrievalIndex.build(pair, data.mono.utterances, k=args.k or DEFAULT_PREFILTER_K)

    corpus, tokens = _split(data, args.split)
    rows: list[str] = []
    for (ctx_ids, _), (ctx_tokens, _) in zip(corpus.pairs, tokens):
        found = retrieve_respond(index, pair, ctx_ids)
        response = detokenize(data.mono_tokens[found.index])
        rows.append(f"{detokenize(ctx_tokens)}\t{response}\t{float(found.backward_logprob)!r}\n")

    out = ws.stage("retrieve")
    ws.snapshot_config("retrieve", config)
    target = out / "retrieval.tsv"
    target.write_text("".join(rows), encoding="utf-8")
    return {"count": len(rows), "index_size": len(index), "k": index.k, "output": str(target)}


def cmd_eval(args: argparse.Namespace, config: RunConfig, ws: Workspace) -> dict[str, Any]:
    """Score a generation file and update the comparison table."""
    hyps = read_paired_tsv(args.hyp, allow_score=True)
    contexts = [tokenize(c) for c, _ in hyps]
    hyp_tokens = [tokenize(r) for _, r in hyps]
    ref_tokens = None
    if args.ref is not None:
        ref_tokens = [tokenize(r) for _, r in read_paired_tsv(args.ref, allow_score=True)]
        if len(ref_tokens) != len(hyp_tokens):
            raise RejectedInputError(
                f"{args.hyp} has {len(hyp_tokens)} lines but {args.ref} has {len(ref_tokens)}"
            )

    system = args.system or Path(args.hyp).stem
    report = text_metrics(hyp_tokens, ref_tokens, system=system)
    report.config_fingerprint = config.fingerprint()

    if ws.path("data", "vocab.tsv").exists():
        data = ws.load_prepared()
        vocab = data.vocab
        report.novel_rate, report.copy_rate = novelty_rates(
            hyp_tokens, [r for _, r in data.train_tokens], data.mono_tokens
        )
        disc_path = ws.path("disc", "disc.ckpt")
        if disc_path.exists():
            disc = _load_checked(disc_path, Discriminator.kind, vocab)
            assert isinstance(disc, Discriminator)
            report.adver = adver_score(
                disc, [vocab.encode(c) for c in contexts], [vocab.encode(h) for h in hyp_tokens]
            )
        if args.model is not None and len(data.test):
            report.ppl = perplexity(_load_pair(args.model, vocab), data.test.pairs, FORWARD)

    out = ws.stage("eval")
    ws.snapshot_config("eval", config)
    emit_report(report, out / "report.json")
    emit_report(report, out / "reports" / f"{system}.json")
    reports = [load_report(p) for p in sorted((out / "reports").glob("*.json"))]
    export_table(reports, out / "table.csv")
    chart = MetricsComparisonViz().create_metrics_chart(reports)
    chart.write_html(str(out / "table.html"), include_plotlyjs=True, full_html=True)
    return report.to_dict()


def cmd_gradcheck(args: argparse.Namespace, config: RunConfig, ws: Workspace) -> dict[str, Any]:
    """Central finite-difference checks over primitives and composed models."""
    if args.seeds < 1:
        raise ConfigError("--seeds must be at least 1")
    seeds = list(range(config.seed, config.seed + args.seeds))
    results = run_gradient_suite(seeds)
    failures = [r for r in results if not r.passed]
    out = ws.stage("gradcheck")
    ws.snapshot_config("gradcheck", config)
    write_json(out / "results.json", {"seeds": seeds, "results": [r.to_dict() for r in results]})
    for failure in failures:
        logger.error("gradcheck_failed", **failure.to_dict())
    return {
        "status": "ok" if not failures else "failed",
        "checks": len(results),
        "failures": len(failures),
        "max_relative_error": max(r.max_relative_error for r in results),
    }


COMMANDS: dict[str, Handler] = {
    "synth": cmd_synth,
    "prepare": cmd_prepare,
    "train-init": cmd_train_init,
    "train-lm": cmd_train_lm,
    "train-disc": cmd_train_disc,
    "bt": cmd_bt,
    "train-multitask": cmd_train_multitask,
    "decode": cmd_decode,
    "retrieve": cmd_retrieve,
    "eval": cmd_eval,
    "gradcheck": cmd_gradcheck,
}


# ============================================
# Entry point
# ============================================


def _emit(payload: dict[str, Any]) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True, default=str) + "\n")
    sys.stdout.flush()


def _emit_error(command: str | None, exc: BaseException, category: str) -> None:
    _emit({"command": command, "status": "error", "category": category, "message": str(exc)})


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    configure_logging(args.log_level, args.log_json)
    command = args.command
    try:
        config = load_run_config(args.config, config_overrides(args))
        ws = Workspace(config.output_dir)
        with ws.lock():
            summary = COMMANDS[command](args, config, ws)
    except ConfigError as exc:
        logger.error("command_failed", command=command, category=exc.category, error=str(exc))
        _emit_error(command, exc, exc.category)
        return EXIT_CONFIG
    except DialogueBTError as exc:
        logger.error("command_failed", command=command, category=exc.category, error=str(exc))
        _emit_error(command, exc, exc.category)
        return EXIT_RUNTIME
    except OSError as exc:
        logger.error("command_failed", command=command, category="io", error=str(exc))
        _emit_error(command, exc, "io")
        return EXIT_RUNTIME
    except Exception as exc:
        logger.exception("command_failed", command=command, category="internal", error=str(exc))
        _emit_error(command, exc, "internal")
        return EXIT_RUNTIME

    status = summary.pop("status", "ok")
    _emit({"command": command, "status": status, "output_dir": str(ws.root), **summary})
    return EXIT_OK if status == "ok" else EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
