"""Decoding strategies: greedy, beam, diverse beam, nucleus, fusion and MMI."""

from collections.abc import Sequence

import numpy as np

from dialogue_bt.decoding.beam import (
    beam_search,
    diverse_beam_search,
    greedy_decode,
    grouped_beam_search,
)
from dialogue_bt.decoding.mmi import mmi_rerank, mmi_scores, rank_by_score
from dialogue_bt.decoding.sampling import nucleus_filter, nucleus_sample, nucleus_support
from dialogue_bt.decoding.scorers import (
    FusedScorer,
    LanguageModelScorer,
    Seq2SeqScorer,
    StepScorer,
    mix_distributions,
)
from dialogue_bt.exceptions import ConfigError
from dialogue_bt.models.results import Hypothesis
from dialogue_bt.models.schemas import DecodeConfig
from dialogue_bt.neural.language_model import LanguageModel
from dialogue_bt.neural.seq2seq import FORWARD, Seq2SeqPair


def fused_decode(
    pair: Seq2SeqPair, lm: LanguageModel, src: Sequence[int], config: DecodeConfig
) -> Hypothesis:
    """Beam search over the seq2seq/LM probability mixture; returns the best hypothesis."""
    scorer = FusedScorer(Seq2SeqScorer(pair, FORWARD), LanguageModelScorer(lm), config.fusion_alpha)
    return beam_search(scorer, src, config.beam_size, config.max_len)[0]


def decode(
    pair: Seq2SeqPair,
    src: Sequence[int],
    config: DecodeConfig,
    rng: np.random.Generator,
    lm: LanguageModel | None = None,
    backward_pair: Seq2SeqPair | None = None,
) -> Hypothesis:
    """Decode one source with the strategy named in ``config``.

    Raises:
        ConfigError: The strategy needs a model that was not supplied.
    """
    max_len = min(config.max_len, pair.config.max_len)
    scorer = Seq2SeqScorer(pair, FORWARD)
    if config.strategy == "greedy":
        return greedy_decode(scorer, src, max_len)
    if config.strategy == "beam":
        return beam_search(scorer, src, config.beam_size, max_len)[0]
    if config.strategy == "diverse_beam":
        hyps = diverse_beam_search(
            scorer, src, config.beam_size, max_len, config.num_groups, config.diversity_strength
        )
        return hyps[rank_by_score([h.logprob for h in hyps])[0]]
    if config.strategy == "nucleus":
        return nucleus_sample(scorer, src, max_len, config.nucleus_p, rng)
    if config.strategy == "fused":
        if lm is None:
            raise ConfigError("fused decoding needs a language model")
        return fused_decode(pair, lm, src, config.model_copy(update={"max_len": max_len}))
    if config.strategy == "mmi":
        return mmi_rerank(
            pair,
            backward_pair if backward_pair is not None else pair,
            src,
            config.mmi_candidates,
            config.mmi_lambda,
            max_len,
            rng,
        )
    raise ConfigError(f"unknown strategy {config.strategy!r}")


__all__ = [
    "FusedScorer",
    "LanguageModelScorer",
    "Seq2SeqScorer",
    "StepScorer",
    "beam_search",
    "decode",
    "diverse_beam_search",
    "fused_decode",
    "greedy_decode",
    "grouped_beam_search",
    "mix_distributions",
    "mmi_rerank",
    "mmi_scores",
    "nucleus_filter",
    "nucleus_sample",
    "nucleus_support",
    "rank_by_score",
]
