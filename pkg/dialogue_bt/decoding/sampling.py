"""Nucleus (top-p) and ancestral sampling."""

from collections.abc import Sequence

import numpy as np

from dialogue_bt.corpus.vocab import BOS_ID, EOS_ID
from dialogue_bt.decoding.beam import mask_banned
from dialogue_bt.decoding.scorers import StepScorer
from dialogue_bt.exceptions import ConfigError
from dialogue_bt.models.results import Hypothesis

CUMULATIVE_SLACK = 1e-12


def nucleus_support(probs: np.ndarray, p: float) -> np.ndarray:
    """Token ids in the smallest probability-sorted prefix with mass >= ``p``.

    Tokens are ordered by decreasing probability, equal probabilities by lower id.
    """
    if not 0.0 < p <= 1.0:
        raise ConfigError(f"nucleus_p must lie in (0, 1], got {p}")
    order = np.lexsort((np.arange(probs.shape[0]), -probs))
    cumulative = np.cumsum(probs[order])
    cutoff = int(np.searchsorted(cumulative, p - CUMULATIVE_SLACK, side="left")) + 1
    return order[: min(cutoff, order.shape[0])]


def nucleus_filter(probs: np.ndarray, p: float) -> np.ndarray:
    """Zero everything outside the nucleus and renormalise.

    Example:
        >>> nucleus_filter(np.array([0.5, 0.3, 0.15, 0.05]), 0.9).round(4)
        array([0.5263, 0.3158, 0.1579, 0.    ])
    """
    support = nucleus_support(probs, p)
    out = np.zeros_like(probs, dtype=np.float64)
    out[support] = probs[support]
    return out / out.sum()


def nucleus_sample(
    scorer: StepScorer,
    src: Sequence[int] | None,
    max_len: int,
    p: float,
    rng: np.random.Generator,
) -> Hypothesis:
    """Sample one sequence, drawing each token from the renormalised nucleus.

    PAD and BOS are removed from the model distribution before the nucleus is formed.
    The returned log-probability is the model's own, not the nucleus-renormalised one.
    """
    state = scorer.initial_state(src)
    tokens: list[int] = []
    logprob = 0.0
    prev = BOS_ID
    while len(tokens) < max_len:
        logp, state = scorer.step(state, np.array([prev]))
        row = mask_banned(logp)[0]
        probs = np.exp(row)
        probs /= probs.sum()
        filtered = nucleus_filter(probs, p)
        tok = int(rng.choice(filtered.shape[0], p=filtered))
        tokens.append(tok)
        logprob += float(row[tok])
        prev = tok
        if tok == EOS_ID:
            break
    return Hypothesis(tokens=tokens, logprob=logprob, state=state, finished=True)


def ancestral_sample(
    scorer: StepScorer,
    src: Sequence[int] | None,
    max_len: int,
    rng: np.random.Generator,
) -> Hypothesis:
    """Sample from the full model distribution at temperature 1."""
    return nucleus_sample(scorer, src, max_len, 1.0, rng)
