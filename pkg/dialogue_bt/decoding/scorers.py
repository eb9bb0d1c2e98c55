"""Step scorers: next-token log-probabilities for batched decoder states.

Every search strategy is written against :class:`StepScorer`, so beam search,
sampling and fusion share one code path regardless of the model behind it.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Protocol

import numpy as np

from dialogue_bt.exceptions import ConfigError
from dialogue_bt.neural.language_model import LanguageModel
from dialogue_bt.neural.layers import DecoderState
from dialogue_bt.neural.seq2seq import FORWARD, Direction, Seq2SeqPair
from dialogue_bt.numcore.tensor import log_softmax_array, softmax_array


class StepScorer(Protocol):
    """Anything that can score one decoding step for a batch of states."""

    vocab_size: int

    def initial_state(self, src: Sequence[int] | None) -> Any:
        """Single-row state for a source sequence."""
        ...

    def step(self, state: Any, prev_tokens: np.ndarray) -> tuple[np.ndarray, Any]:
        """Log-probabilities (rows, vocab) and the advanced state."""
        ...

    def select(self, state: Any, rows: Sequence[int]) -> Any:
        """Rows of a batched state."""
        ...

    def stack(self, states: Sequence[Any]) -> Any:
        """Concatenate states along the batch axis."""
        ...


@dataclass
class Seq2SeqScorer:
    """One direction of a :class:`Seq2SeqPair`."""

    pair: Seq2SeqPair
    direction: Direction = FORWARD

    @property
    def vocab_size(self) -> int:
        return self.pair.config.vocab_size

    def initial_state(self, src: Sequence[int] | None) -> DecoderState:
        if src is None:
            raise ConfigError("a seq2seq scorer needs a source sequence")
        return self.pair.encode(src)

    def step(self, state: DecoderState, prev_tokens: np.ndarray) -> tuple[np.ndarray, DecoderState]:
        logits, new_state = self.pair.step_logits(self.direction, state, prev_tokens)
        return log_softmax_array(logits.data), new_state

    def select(self, state: DecoderState, rows: Sequence[int]) -> DecoderState:
        return state.select(rows)

    def stack(self, states: Sequence[DecoderState]) -> DecoderState:
        return DecoderState.stack(states)


@dataclass
class LanguageModelScorer:
    """Unconditional scorer; the source is ignored."""

    lm: LanguageModel

    @property
    def vocab_size(self) -> int:
        return self.lm.config.vocab_size

    def initial_state(self, src: Sequence[int] | None) -> DecoderState:
        return self.lm.initial_state(1)

    def step(self, state: DecoderState, prev_tokens: np.ndarray) -> tuple[np.ndarray, DecoderState]:
        logits, new_state = self.lm.step_logits(state, prev_tokens)
        return log_softmax_array(logits.data), new_state

    def select(self, state: DecoderState, rows: Sequence[int]) -> DecoderState:
        return state.select(rows)

    def stack(self, states: Sequence[DecoderState]) -> DecoderState:
        return DecoderState.stack(states)


def mix_distributions(s2s_logits: np.ndarray, lm_logits: np.ndarray, alpha: float) -> np.ndarray:
    """Log of ``alpha * softmax(s2s) + (1 - alpha) * softmax(lm)`` per row.

    The end points return the corresponding log-softmax unchanged.
    """
    if alpha >= 1.0:
        return log_softmax_array(s2s_logits)
    if alpha <= 0.0:
        return log_softmax_array(lm_logits)
    mixed = alpha * softmax_array(s2s_logits) + (1.0 - alpha) * softmax_array(lm_logits)
    with np.errstate(divide="ignore"):
        return np.log(mixed)


class FusedScorer:
    """Probability-space mixture of a seq2seq direction and a language model."""

    def __init__(self, s2s: Seq2SeqScorer, lm: LanguageModelScorer, alpha: float) -> None:
        """Initialize the mixture.

        Raises:
            ConfigError: Vocabulary sizes differ or ``alpha`` is outside [0, 1].
        """
        if s2s.vocab_size != lm.vocab_size:
            raise ConfigError(
                f"fusion needs a shared vocabulary: seq2seq has {s2s.vocab_size}, "
                f"language model has {lm.vocab_size}"
            )
        if not 0.0 <= alpha <= 1.0:
            raise ConfigError(f"fusion_alpha must lie in [0, 1], got {alpha}")
        self.s2s = s2s
        self.lm = lm
        self.alpha = alpha

    @property
    def vocab_size(self) -> int:
        return self.s2s.vocab_size

    def initial_state(self, src: Sequence[int] | None) -> tuple[DecoderState, DecoderState]:
        return self.s2s.initial_state(src), self.lm.initial_state(src)

    def step(
        self, state: tuple[DecoderState, DecoderState], prev_tokens: np.ndarray
    ) -> tuple[np.ndarray, tuple[DecoderState, DecoderState]]:
        s2s_state, lm_state = state
        s2s_logits, s2s_next = self.s2s.pair.step_logits(self.s2s.direction, s2s_state, prev_tokens)
        lm_logits, lm_next = self.lm.lm.step_logits(lm_state, prev_tokens)
        return mix_distributions(s2s_logits.data, lm_logits.data, self.alpha), (s2s_next, lm_next)

    def select(
        self, state: tuple[DecoderState, DecoderState], rows: Sequence[int]
    ) -> tuple[DecoderState, DecoderState]:
        return state[0].select(rows), state[1].select(rows)

    def stack(
        self, states: Sequence[tuple[DecoderState, DecoderState]]
    ) -> tuple[DecoderState, DecoderState]:
        return (
            DecoderState.stack([s for s, _ in states]),
            DecoderState.stack([s for _, s in states]),
        )
