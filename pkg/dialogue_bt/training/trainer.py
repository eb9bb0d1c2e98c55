"""Initialisation on paired data and multi-task (seq2seq + autoencoder) training."""

from collections.abc import Sequence

from dialogue_bt.corpus.batching import BatchStream, truncate
from dialogue_bt.corpus.datasets import MonoCorpus, PairedCorpus
from dialogue_bt.evaluation.model_metrics import mean_token_nll
from dialogue_bt.exceptions import ConfigError, RejectedInputError
from dialogue_bt.log import get_logger
from dialogue_bt.models.results import PhaseResult
from dialogue_bt.models.schemas import BtConfig, OptimConfig
from dialogue_bt.neural.seq2seq import BACKWARD, FORWARD, Direction, Seq2SeqPair
from dialogue_bt.numcore import tensor as T
from dialogue_bt.numcore.rng import SHUFFLE_STREAM, named_rng
from dialogue_bt.numcore.tensor import Tensor
from dialogue_bt.training.loop import fit

logger = get_logger(__name__)

MIX_STREAM = "multitask-mix"

TokenPair = tuple[list[int], list[int]]


def batch_mean_nll(
    pair: Seq2SeqPair, batch: Sequence[TokenPair], direction: Direction
) -> Tensor:
    """Mean per-token teacher-forced NLL of ``target`` given ``source`` over a batch."""
    max_len = pair.config.max_len
    total, count = pair.batch_nll(
        [truncate(s, max_len) for s, _ in batch],
        [truncate(t, max_len) for _, t in batch],
        direction,
    )
    return T.scale(total, 1.0 / count)


def validation_pairs(
    train: PairedCorpus, valid: PairedCorpus | None, config: BtConfig
) -> list[TokenPair]:
    """Held-out pairs, or a training prefix when no validation split is given."""
    if valid is not None and len(valid):
        return list(valid.pairs)
    logger.warning("no_validation_split", fallback="training_prefix", size=config.validation_size)
    return list(train.pairs[: config.validation_size])


def _swap(pairs: Sequence[TokenPair]) -> list[TokenPair]:
    return [(t, s) for s, t in pairs]


def init_train(
    pair: Seq2SeqPair,
    train: PairedCorpus,
    optim: OptimConfig,
    config: BtConfig,
    valid: PairedCorpus | None = None,
) -> PhaseResult:
    """Train P_f and P_b jointly on paired data (sum of both per-token NLLs).

    Raises:
        RejectedInputError: ``train`` is empty.
    """
    if not len(train):
        raise RejectedInputError("init_train needs a non-empty paired corpus")
    stream = BatchStream(train.pairs, config.batch_size, named_rng(config.rng_seed, SHUFFLE_STREAM))
    held_out = validation_pairs(train, valid, config)
    held_out_rev = _swap(held_out)

    def step_loss() -> Tensor:
        batch = stream.next_batch()
        forward = batch_mean_nll(pair, batch, FORWARD)
        backward = batch_mean_nll(pair, _swap(batch), BACKWARD)
        return T.add(forward, backward)

    def validate() -> float:
        return mean_token_nll(pair, held_out, FORWARD) + mean_token_nll(pair, held_out_rev, BACKWARD)

    return fit("init", pair.parameters(), step_loss, validate, optim, config)


def train_direction(
    name: str,
    pair: Seq2SeqPair,
    pairs: Sequence[TokenPair],
    direction: Direction,
    optim: OptimConfig,
    config: BtConfig,
    held_out: Sequence[TokenPair],
) -> PhaseResult:
    """Train one direction (shared encoder plus that decoder) on (source, target) pairs."""
    if not pairs:
        raise RejectedInputError(f"{name}: no training pairs")
    stream = BatchStream(list(pairs), config.batch_size, named_rng(config.rng_seed, SHUFFLE_STREAM))
    held = list(held_out) if held_out else list(pairs[: config.validation_size])

    def step_loss() -> Tensor:
        return batch_mean_nll(pair, stream.next_batch(), direction)

    def validate() -> float:
        return mean_token_nll(pair, held, direction)

    return fit(name, pair.direction_parameters(direction), step_loss, validate, optim, config)


def multitask_train(
    pair: Seq2SeqPair,
    train: PairedCorpus,
    mono: MonoCorpus,
    mixing_ratio: float,
    optim: OptimConfig,
    config: BtConfig,
    valid: PairedCorpus | None = None,
) -> PhaseResult:
    """Interleave seq2seq batches with autoencoder batches through the forward decoder.

    At every step an autoencoder batch from ``mono`` is drawn with probability
    ``mixing_ratio``; otherwise a paired batch. Only the encoder and the forward decoder
    are updated.

    Raises:
        ConfigError: ``mixing_ratio`` outside (0, 1).
        RejectedInputError: Either corpus is empty.
    """
    if not 0.0 < mixing_ratio < 1.0:
        raise ConfigError(f"mixing_ratio must lie in (0, 1), got {mixing_ratio}")
    if not len(train) or not len(mono):
        raise RejectedInputError("multitask_train needs non-empty paired and mono corpora")
    pair_stream = BatchStream(
        train.pairs, config.batch_size, named_rng(config.rng_seed, SHUFFLE_STREAM)
    )
    mono_stream = BatchStream(
        mono.utterances, config.batch_size, named_rng(config.rng_seed, f"{SHUFFLE_STREAM}-mono")
    )
    mix_rng = named_rng(config.rng_seed, MIX_STREAM)
    held_out = validation_pairs(train, valid, config)

    def step_loss() -> Tensor:
        if mix_rng.random() < mixing_ratio:
            utterances = mono_stream.next_batch()
            return batch_mean_nll(pair, [(u, u) for u in utterances], FORWARD)
        return batch_mean_nll(pair, pair_stream.next_batch(), FORWARD)

    def validate() -> float:
        return mean_token_nll(pair, held_out, FORWARD)

    return fit(
        "multitask", pair.direction_parameters(FORWARD), step_loss, validate, optim, config
    )
