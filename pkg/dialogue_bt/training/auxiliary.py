"""Training of the fusion language model and the relevance discriminator."""

from collections.abc import Sequence

import numpy as np

from dialogue_bt.corpus.batching import BatchStream, truncate
from dialogue_bt.corpus.datasets import MonoCorpus, PairedCorpus
from dialogue_bt.exceptions import RejectedInputError
from dialogue_bt.log import get_logger
from dialogue_bt.models.results import PhaseResult
from dialogue_bt.models.schemas import BtConfig, OptimConfig
from dialogue_bt.neural.discriminator import Discriminator
from dialogue_bt.neural.language_model import LanguageModel
from dialogue_bt.numcore import tensor as T
from dialogue_bt.numcore.rng import SHUFFLE_STREAM, named_rng
from dialogue_bt.numcore.tensor import Tensor
from dialogue_bt.training.loop import fit

logger = get_logger(__name__)

NEGATIVE_STREAM = "disc-negatives"

TokenPair = tuple[list[int], list[int]]
LabeledPair = tuple[list[int], list[int], int]


def _lm_mean_nll(lm: LanguageModel, utterances: Sequence[Sequence[int]]) -> Tensor:
    total, count = lm.batch_nll([truncate(u, lm.config.max_len) for u in utterances])
    return T.scale(total, 1.0 / count)


def lm_corpus_nll(lm: LanguageModel, utterances: Sequence[Sequence[int]], batch_size: int = 32) -> float:
    """Mean per-token NLL of ``utterances`` under ``lm``."""
    total, count = 0.0, 0
    for start in range(0, len(utterances), batch_size):
        chunk = [truncate(u, lm.config.max_len) for u in utterances[start : start + batch_size]]
        loss, n = lm.batch_nll(chunk)
        total += loss.item()
        count += n
    return total / count


def train_language_model(
    lm: LanguageModel,
    mono: MonoCorpus,
    optim: OptimConfig,
    config: BtConfig,
    valid_mono: MonoCorpus | None = None,
) -> PhaseResult:
    """Fit the LM on D_T with the same convergence rule as initialisation.

    Raises:
        RejectedInputError: ``mono`` is empty.
    """
    if not len(mono):
        raise RejectedInputError("train_language_model needs a non-empty monologue corpus")
    stream = BatchStream(mono.utterances, config.batch_size, named_rng(config.rng_seed, SHUFFLE_STREAM))
    held = (
        valid_mono.utterances
        if valid_mono is not None and len(valid_mono)
        else mono.utterances[: config.validation_size]
    )

    def step_loss() -> Tensor:
        return _lm_mean_nll(lm, stream.next_batch())

    def validate() -> float:
        return lm_corpus_nll(lm, held)

    return fit("language_model", lm.parameters(), step_loss, validate, optim, config)


def with_negatives(pairs: Sequence[TokenPair], rng: np.random.Generator) -> list[LabeledPair]:
    """Each gold pair (label 1) followed by one mismatched response (label 0).

    The mismatched response is drawn uniformly from the other pairs.

    Raises:
        RejectedInputError: Fewer than two pairs.
    """
    n = len(pairs)
    if n < 2:
        raise RejectedInputError("negative sampling needs at least two pairs")
    labeled: list[LabeledPair] = []
    for i, (context, response) in enumerate(pairs):
        j = int(rng.integers(n - 1))
        if j >= i:
            j += 1
        labeled.append((list(context), list(response), 1))
        labeled.append((list(context), list(pairs[j][1]), 0))
    return labeled


def _disc_loss(disc: Discriminator, batch: Sequence[LabeledPair]) -> Tensor:
    max_len = disc.config.max_len
    loss = disc.batch_loss(
        [truncate(c, max_len) for c, _, _ in batch],
        [truncate(r, max_len) for _, r, _ in batch],
        [label for _, _, label in batch],
    )
    return T.scale(loss, 1.0 / len(batch))


def train_discriminator(
    disc: Discriminator,
    train: PairedCorpus,
    optim: OptimConfig,
    config: BtConfig,
    valid: PairedCorpus | None = None,
) -> PhaseResult:
    """Train the relevance classifier on gold pairs against sampled mismatches.

    One mismatched response is drawn per gold pair, once, for both splits.
    """
    negatives_rng = named_rng(config.rng_seed, NEGATIVE_STREAM)
    labeled = with_negatives(train.pairs, negatives_rng)
    held_pairs = (
        valid.pairs
        if valid is not None and len(valid) >= 2
        else train.pairs[: max(2, config.validation_size)]
    )
    held = with_negatives(held_pairs, named_rng(config.rng_seed, f"{NEGATIVE_STREAM}-valid"))
    stream = BatchStream(labeled, config.batch_size, named_rng(config.rng_seed, SHUFFLE_STREAM))
    logger.info("discriminator_examples", train=len(labeled), held_out=len(held))

    def step_loss() -> Tensor:
        return _disc_loss(disc, stream.next_batch())

    def validate() -> float:
        total = 0.0
        for start in range(0, len(held), 32):
            chunk = held[start : start + 32]
            total += _disc_loss(disc, chunk).item() * len(chunk)
        return total / len(held)

    return fit("discriminator", disc.parameters(), step_loss, validate, optim, config)
