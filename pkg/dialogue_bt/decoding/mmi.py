"""Maximum-mutual-information reranking of sampled candidates."""

from collections.abc import Sequence

import numpy as np

from dialogue_bt.corpus.vocab import EOS_ID
from dialogue_bt.decoding.sampling import ancestral_sample
from dialogue_bt.decoding.scorers import Seq2SeqScorer
from dialogue_bt.exceptions import ConfigError
from dialogue_bt.log import get_logger
from dialogue_bt.models.results import Hypothesis
from dialogue_bt.neural.seq2seq import BACKWARD, FORWARD, Seq2SeqPair

logger = get_logger(__name__)


def mmi_scores(
    forward_logprobs: Sequence[float], backward_logprobs: Sequence[float], mmi_lambda: float
) -> np.ndarray:
    """``log P_f(Y|X) + lambda * log P_b(X|Y)`` per candidate.

    Example:
        >>> mmi_scores([-1.0, -1.5], [-5.0, -2.0], 0.5)
        array([-3.5, -2.5])
    """
    return np.asarray(forward_logprobs, dtype=np.float64) + mmi_lambda * np.asarray(
        backward_logprobs, dtype=np.float64
    )


def rank_by_score(scores: Sequence[float]) -> list[int]:
    """Candidate indices by decreasing score; ties keep candidate order."""
    return [int(i) for i in np.argsort(-np.asarray(scores, dtype=np.float64), kind="stable")]


def dedupe_candidates(candidates: Sequence[Hypothesis]) -> list[Hypothesis]:
    """Drop repeated token sequences, keeping first occurrences."""
    seen: set[tuple[int, ...]] = set()
    unique = []
    for hyp in candidates:
        key = tuple(hyp.tokens)
        if key not in seen:
            seen.add(key)
            unique.append(hyp)
    return unique


def rerank_candidates(
    candidates: Sequence[Hypothesis],
    backward_pair: Seq2SeqPair,
    src: Sequence[int],
    mmi_lambda: float,
) -> list[Hypothesis]:
    """Score candidates by MMI and return them best first.

    Candidates with no content tokens cannot be encoded by the backward model and are
    skipped, unless every candidate is empty; then forward log-probability alone ranks them.
    """
    scoreable = [h for h in candidates if h.content]
    if not scoreable:
        ranked = [candidates[i] for i in rank_by_score([h.logprob for h in candidates])]
        for hyp in ranked:
            hyp.score = hyp.logprob
        return ranked
    target = list(src) + [EOS_ID]
    backward = [backward_pair.sequence_logprob(h.content, target, BACKWARD) for h in scoreable]
    scores = mmi_scores([h.logprob for h in scoreable], backward, mmi_lambda)
    for hyp, score in zip(scoreable, scores):
        hyp.score = float(score)
    return [scoreable[i] for i in rank_by_score(scores)]


def mmi_rerank(
    forward_pair: Seq2SeqPair,
    backward_pair: Seq2SeqPair,
    src: Sequence[int],
    num_candidates: int,
    mmi_lambda: float,
    max_len: int,
    rng: np.random.Generator,
) -> Hypothesis:
    """Sample ``num_candidates`` responses from P_f and return the MMI argmax.

    Raises:
        ConfigError: ``num_candidates`` < 1 or negative ``mmi_lambda``.
    """
    if num_candidates < 1:
        raise ConfigError("mmi_candidates must be at least 1")
    if mmi_lambda < 0:
        raise ConfigError("mmi_lambda must be non-negative")
    scorer = Seq2SeqScorer(forward_pair, FORWARD)
    sampled = [ancestral_sample(scorer, src, max_len, rng) for _ in range(num_candidates)]
    unique = dedupe_candidates(sampled)
    ranked = rerank_candidates(unique, backward_pair, src, mmi_lambda)
    logger.debug("mmi_reranked", sampled=len(sampled), unique=len(unique), best=ranked[0].score)
    return ranked[0]
