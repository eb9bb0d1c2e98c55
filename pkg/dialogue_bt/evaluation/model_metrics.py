"""Metrics that need a trained model: perplexity and the adversarial score."""

import math
from collections.abc import Sequence
from typing import TYPE_CHECKING

from dialogue_bt.corpus.batching import truncate
from dialogue_bt.exceptions import RejectedInputError

if TYPE_CHECKING:
    from dialogue_bt.neural.discriminator import Discriminator
    from dialogue_bt.neural.seq2seq import Direction, Seq2SeqPair

ADVER_THRESHOLD = 0.5
EVAL_BATCH_SIZE = 32

TokenPair = tuple[Sequence[int], Sequence[int]]


def summed_nll(
    pair: "Seq2SeqPair",
    pairs: Sequence[TokenPair],
    direction: "Direction",
    batch_size: int = EVAL_BATCH_SIZE,
) -> tuple[float, int]:
    """Total teacher-forced NLL of every target and the number of scored tokens.

    Sequences are truncated to the model's ``max_len``.
    """
    max_len = pair.config.max_len
    total, count = 0.0, 0
    for start in range(0, len(pairs), batch_size):
        chunk = pairs[start : start + batch_size]
        loss, n = pair.batch_nll(
            [truncate(s, max_len) for s, _ in chunk],
            [truncate(t, max_len) for _, t in chunk],
            direction,
        )
        total += loss.item()
        count += n
    return total, count


def mean_token_nll(
    pair: "Seq2SeqPair", pairs: Sequence[TokenPair], direction: "Direction"
) -> float:
    """Mean per-token NLL over all non-pad target tokens.

    Raises:
        RejectedInputError: ``pairs`` is empty.
    """
    if not pairs:
        raise RejectedInputError("mean_token_nll needs at least one pair")
    total, count = summed_nll(pair, pairs, direction)
    return total / count


def perplexity(pair: "Seq2SeqPair", pairs: Sequence[TokenPair], direction: "Direction") -> float:
    """``exp`` of the mean per-token NLL of the targets given the sources.

    Raises:
        RejectedInputError: ``pairs`` is empty.
    """
    return math.exp(mean_token_nll(pair, pairs, direction))


def adver_score(
    disc: "Discriminator",
    contexts: Sequence[Sequence[int]],
    responses: Sequence[Sequence[int]],
    batch_size: int = EVAL_BATCH_SIZE,
) -> float:
    """Fraction of (context, response) pairs the discriminator scores strictly above 0.5.

    Raises:
        RejectedInputError: Empty or length-mismatched input.
    """
    if not contexts or len(contexts) != len(responses):
        raise RejectedInputError("adver_score needs equal-length, non-empty inputs")
    max_len = disc.config.max_len
    fooled = 0
    for start in range(0, len(contexts), batch_size):
        scores = disc.score_batch(
            [truncate(c, max_len) for c in contexts[start : start + batch_size]],
            [truncate(r, max_len) for r in responses[start : start + batch_size]],
        )
        fooled += int((scores > ADVER_THRESHOLD).sum())
    return fooled / len(contexts)
