"""Greedy, beam and diverse (grouped) beam search.

Plain beam search is grouped search with a single group and no diversity penalty.
Scores are raw sums of token log-probabilities without length normalisation; the
Hamming penalty of diverse beam search affects only which candidates are selected.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from dialogue_bt.corpus.vocab import BOS_ID, EOS_ID, PAD_ID
from dialogue_bt.decoding.scorers import StepScorer
from dialogue_bt.exceptions import ConfigError
from dialogue_bt.models.results import Hypothesis

BANNED_IDS = (PAD_ID, BOS_ID)


def mask_banned(logprobs: np.ndarray) -> np.ndarray:
    """Copy of ``logprobs`` with PAD and BOS set to -inf (no renormalisation)."""
    out = np.array(logprobs, dtype=np.float64, copy=True)
    out[..., list(BANNED_IDS)] = -np.inf
    return out


def greedy_decode(scorer: StepScorer, src: Sequence[int] | None, max_len: int) -> Hypothesis:
    """Emit the most probable token at every step until EOS or ``max_len``."""
    state = scorer.initial_state(src)
    tokens: list[int] = []
    logprob = 0.0
    prev = BOS_ID
    while len(tokens) < max_len:
        logp, state = scorer.step(state, np.array([prev]))
        row = mask_banned(logp)[0]
        tok = int(np.argmax(row))
        tokens.append(tok)
        logprob += float(row[tok])
        prev = tok
        if tok == EOS_ID:
            break
    return Hypothesis(tokens=tokens, logprob=logprob, state=state, finished=True)


@dataclass
class _Group:
    open: list[Hypothesis]
    finished: list[Hypothesis] = field(default_factory=list)
    done: bool = False


def _rank(hyps: list[Hypothesis]) -> list[Hypothesis]:
    return sorted(hyps, key=lambda h: -h.logprob)


def _advance_group(
    scorer: StepScorer,
    group: _Group,
    group_id: int,
    width: int,
    max_len: int,
    penalty: np.ndarray,
    diversity_strength: float,
) -> list[int]:
    """Expand one group by one token; returns the tokens it selected at this step."""
    batch = scorer.stack([h.state for h in group.open])
    prev = np.array([h.tokens[-1] if h.tokens else BOS_ID for h in group.open])
    logp, new_state = scorer.step(batch, prev)
    logp = mask_banned(logp)
    totals = np.array([h.logprob for h in group.open])[:, None] + logp
    selection = totals - diversity_strength * penalty[None, :]

    vocab = logp.shape[1]
    order = np.argsort(-selection.ravel(), kind="stable")
    chosen: list[int] = []
    new_open: list[Hypothesis] = []
    for rank, flat in enumerate(order):
        if not np.isfinite(selection.flat[flat]):
            break
        row, tok = divmod(int(flat), vocab)
        parent = group.open[row]
        tokens = parent.tokens + [tok]
        finishing = tok == EOS_ID or len(tokens) >= max_len
        if finishing:
            if rank < width:
                group.finished.append(
                    Hypothesis(
                        tokens=tokens,
                        logprob=float(totals[row, tok]),
                        state=scorer.select(new_state, [row]),
                        finished=True,
                        group=group_id,
                    )
                )
                chosen.append(tok)
        elif len(new_open) < width:
            new_open.append(
                Hypothesis(
                    tokens=tokens,
                    logprob=float(totals[row, tok]),
                    state=scorer.select(new_state, [row]),
                    group=group_id,
                )
            )
            chosen.append(tok)
        if rank + 1 >= width and len(new_open) >= width:
            break

    group.finished = _rank(group.finished)[:width]
    group.open = new_open
    if not new_open:
        group.done = True
    elif len(group.finished) >= width and new_open[0].logprob <= group.finished[-1].logprob:
        group.done = True
    return chosen


def grouped_beam_search(
    scorer: StepScorer,
    src: Sequence[int] | None,
    beam_size: int,
    max_len: int,
    num_groups: int = 1,
    diversity_strength: float = 0.0,
) -> list[Hypothesis]:
    """Diverse beam search over ``num_groups`` groups of ``beam_size / num_groups`` beams.

    At each step, group ``g`` ranks candidates by accumulated log-probability minus
    ``diversity_strength`` times the number of times the candidate token was already
    selected at this step by groups before ``g``.

    Returns:
        Finished hypotheses, group by group, each group sorted by log-probability.

    Raises:
        ConfigError: ``num_groups`` does not divide ``beam_size``.
    """
    if beam_size < 1 or num_groups < 1 or beam_size % num_groups:
        raise ConfigError(f"num_groups ({num_groups}) must divide beam_size ({beam_size})")
    if max_len < 1:
        raise ConfigError("max_len must be at least 1")
    width = beam_size // num_groups
    root = scorer.initial_state(src)
    groups = [
        _Group(open=[Hypothesis(tokens=[], logprob=0.0, state=root, group=g)])
        for g in range(num_groups)
    ]
    for _ in range(max_len):
        if all(g.done for g in groups):
            break
        penalty = np.zeros(scorer.vocab_size)
        for g_id, group in enumerate(groups):
            if group.done:
                continue
            for tok in _advance_group(
                scorer, group, g_id, width, max_len, penalty, diversity_strength
            ):
                penalty[tok] += 1.0
    results: list[Hypothesis] = []
    for group in groups:
        results.extend(_rank(group.finished))
    return results


def beam_search(
    scorer: StepScorer, src: Sequence[int] | None, beam_size: int, max_len: int
) -> list[Hypothesis]:
    """Top ``beam_size`` finished hypotheses sorted by log-probability."""
    return grouped_beam_search(scorer, src, beam_size, max_len, num_groups=1)


def diverse_beam_search(
    scorer: StepScorer,
    src: Sequence[int] | None,
    beam_size: int,
    max_len: int,
    num_groups: int,
    diversity_strength: float,
) -> list[Hypothesis]:
    """Hamming-penalised grouped beam search; see :func:`grouped_beam_search`."""
    return grouped_beam_search(scorer, src, beam_size, max_len, num_groups, diversity_strength)
