"""Iterative back translation over a non-conversational corpus.

Each iteration runs a backward phase (P_b, frozen, translates monologue utterances
into pseudo contexts; P_f learns context -> utterance) followed by a forward phase
(P_f, frozen, answers the real contexts; P_b learns response -> context). Pseudo
pairs are regenerated at the start of every phase from a snapshot of the frozen
decoder, so no gradient ever reaches it.
"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

from dialogue_bt.corpus.batching import truncate
from dialogue_bt.corpus.datasets import MonoCorpus, PairedCorpus
from dialogue_bt.corpus.vocab import UNK_ID
from dialogue_bt.decoding.beam import beam_search
from dialogue_bt.decoding.scorers import Seq2SeqScorer
from dialogue_bt.evaluation.model_metrics import perplexity
from dialogue_bt.exceptions import FrozenParameterError, RejectedInputError
from dialogue_bt.log import get_logger
from dialogue_bt.models.results import IterationTrace, PhaseResult, PseudoOrigin, PseudoPair
from dialogue_bt.models.schemas import BtConfig, OptimConfig
from dialogue_bt.neural.seq2seq import BACKWARD, FORWARD, Direction, Seq2SeqPair
from dialogue_bt.training.trainer import init_train, train_direction

logger = get_logger(__name__)

IterationCallback = Callable[[int, Seq2SeqPair, IterationTrace], None]


def generate_pseudo_pairs(
    frozen: Seq2SeqPair,
    reals: Sequence[Sequence[int]],
    decode_direction: Direction,
    beam_size: int,
    origin: PseudoOrigin,
) -> list[PseudoPair]:
    """Translate every real sequence with beam search and pair it with its translation.

    The synthetic side is the best hypothesis with at least one content token; if
    every hypothesis is empty it falls back to ``[UNK]``.
    """
    scorer = Seq2SeqScorer(frozen, decode_direction)
    max_len = frozen.config.max_len
    pseudo = []
    for real in reals:
        hyps = beam_search(scorer, truncate(real, max_len), beam_size, max_len)
        synthetic = next((h.content for h in hyps if h.content), [UNK_ID])
        pseudo.append(PseudoPair(source=list(synthetic), target=list(real), origin=origin))
    return pseudo


def _run_phase(
    name: str,
    pair: Seq2SeqPair,
    reals: Sequence[Sequence[int]],
    held_out_reals: Sequence[Sequence[int]],
    frozen_direction: Direction,
    optim: OptimConfig,
    config: BtConfig,
) -> PhaseResult:
    trained_direction = FORWARD if frozen_direction == BACKWARD else BACKWARD
    origin: PseudoOrigin = "backward" if frozen_direction == BACKWARD else "forward"
    digest = pair.decoder_digest(frozen_direction)
    frozen = pair.snapshot()

    pseudo = generate_pseudo_pairs(frozen, reals, frozen_direction, config.pseudo_beam_size, origin)
    held_pseudo = generate_pseudo_pairs(
        frozen, held_out_reals, frozen_direction, config.pseudo_beam_size, origin
    )
    logger.info("pseudo_pairs_generated", phase=name, pseudo_pairs=len(pseudo), held_out=len(held_pseudo))

    result = train_direction(
        name,
        pair,
        [(p.source, p.target) for p in pseudo],
        trained_direction,
        optim,
        config,
        [(p.source, p.target) for p in held_pseudo],
    )
    result.pseudo_pairs = pseudo

    if pair.decoder_digest(frozen_direction) != digest:
        raise FrozenParameterError(f"{name}: the {frozen_direction} decoder changed during the phase")
    return result


def backward_phase(
    pair: Seq2SeqPair,
    mono: MonoCorpus,
    optim: OptimConfig,
    config: BtConfig,
    valid_mono: MonoCorpus | None = None,
) -> PhaseResult:
    """Train P_f on (b(T_i), T_i) where b is beam search under a frozen P_b.

    Raises:
        RejectedInputError: ``mono`` is empty.
        FrozenParameterError: The backward decoder changed.
    """
    if not len(mono):
        raise RejectedInputError("backward_phase needs a non-empty monologue corpus")
    held = valid_mono.utterances if valid_mono is not None and len(valid_mono) else []
    return _run_phase(
        "backward", pair, mono.utterances, held[: config.validation_size], BACKWARD, optim, config
    )


def forward_phase(
    pair: Seq2SeqPair,
    paired: PairedCorpus,
    optim: OptimConfig,
    config: BtConfig,
    valid: PairedCorpus | None = None,
) -> PhaseResult:
    """Train P_b on (f(X_i), X_i) where f is beam search under a frozen P_f.

    Gold responses are never read.

    Raises:
        RejectedInputError: ``paired`` is empty.
        FrozenParameterError: The forward decoder changed.
    """
    if not len(paired):
        raise RejectedInputError("forward_phase needs a non-empty paired corpus")
    held = valid.contexts if valid is not None and len(valid) else []
    return _run_phase(
        "forward", pair, paired.contexts, held[: config.validation_size], FORWARD, optim, config
    )


def measure_iteration(
    pair: Seq2SeqPair,
    contexts: Sequence[Sequence[int]],
    utterances: Sequence[Sequence[int]],
    config: BtConfig,
) -> tuple[float, float]:
    """Forward and backward validation perplexity on freshly generated pseudo pairs.

    The forward value scores P_f on pairs built by the current P_b from ``utterances``;
    the backward value scores P_b on pairs built by the current P_f from ``contexts``.
    """
    fwd_pairs = generate_pseudo_pairs(pair, utterances, BACKWARD, config.pseudo_beam_size, "backward")
    bwd_pairs = generate_pseudo_pairs(pair, contexts, FORWARD, config.pseudo_beam_size, "forward")
    fwd = perplexity(pair, [(p.source, p.target) for p in fwd_pairs], FORWARD)
    bwd = perplexity(pair, [(p.source, p.target) for p in bwd_pairs], BACKWARD)
    return fwd, bwd


@dataclass
class BtResult:
    """Final pair, its iteration trace and every phase outcome."""

    pair: Seq2SeqPair
    trace: IterationTrace
    phases: list[PhaseResult] = field(default_factory=list)
    stopped_early: bool = False


def run_bt(
    pair: Seq2SeqPair,
    paired: PairedCorpus,
    mono: MonoCorpus,
    optim: OptimConfig,
    config: BtConfig,
    valid: PairedCorpus | None = None,
    valid_mono: MonoCorpus | None = None,
    initialize: bool = False,
    on_iteration: IterationCallback | None = None,
) -> BtResult:
    """Alternate backward and forward phases ``config.num_iterations`` times.

    Trace entry 0 is measured before the first iteration. Training stops early once
    forward validation perplexity has risen ``config.regression_patience`` iterations
    in a row.

    Args:
        pair: Initialised pair, trained in place.
        paired: D; its contexts feed the forward phase.
        mono: D_T; feeds the backward phase.
        optim: Adam settings, fresh moments per phase.
        config: Iteration count, beam width and convergence rule.
        valid: Held-out pairs for the trace and phase validation.
        valid_mono: Held-out utterances for the trace and phase validation.
        initialize: Run :func:`init_train` first.
        on_iteration: Called after each iteration with (k, pair, trace).
    """
    if not len(paired) or not len(mono):
        raise RejectedInputError("run_bt needs non-empty paired and monologue corpora")
    phases: list[PhaseResult] = []
    if initialize:
        phases.append(init_train(pair, paired, optim, config, valid))

    trace_contexts = (valid if valid is not None and len(valid) else paired).contexts
    trace_utterances = (valid_mono if valid_mono is not None and len(valid_mono) else mono).utterances
    trace_contexts = trace_contexts[: config.validation_size]
    trace_utterances = trace_utterances[: config.validation_size]

    trace = IterationTrace()
    trace.append(*measure_iteration(pair, trace_contexts, trace_utterances, config))
    logger.info("bt_started", iterations=config.num_iterations, fwd_ppl=trace.fwd_ppl[0], bwd_ppl=trace.bwd_ppl[0])

    result = BtResult(pair=pair, trace=trace, phases=phases)
    for k in range(1, config.num_iterations + 1):
        logger.info("iteration_started", iteration=k)
        phases.append(backward_phase(pair, mono, optim, config, valid_mono))
        phases.append(forward_phase(pair, paired, optim, config, valid))
        trace.append(*measure_iteration(pair, trace_contexts, trace_utterances, config))
        logger.info("iteration_finished", iteration=k, fwd_ppl=trace.fwd_ppl[-1], bwd_ppl=trace.bwd_ppl[-1])
        if on_iteration is not None:
            on_iteration(k, pair, trace)
        if trace.consecutive_fwd_increases() >= config.regression_patience:
            logger.info("early_stop", reason="forward_perplexity_regression", iteration=k)
            result.stopped_early = True
            break
    return result
