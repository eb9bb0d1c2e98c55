"""Pytest configuration and fixtures."""

from collections.abc import Sequence

import numpy as np
import pytest

from dialogue_bt.corpus.datasets import MonoCorpus, PairedCorpus
from dialogue_bt.corpus.vocab import BOS_ID
from dialogue_bt.models.schemas import BtConfig, ModelConfig, OptimConfig
from dialogue_bt.neural.seq2seq import Seq2SeqPair
from dialogue_bt.numcore.rng import INIT_STREAM, named_rng
from dialogue_bt.numcore.tensor import log_softmax_array


class TableScorer:
    """Deterministic step scorer whose distribution depends only on the emitted prefix.

    Each row of the state is the tuple of source ids followed by emitted tokens; the
    logits for a prefix are drawn from a generator seeded with that prefix.
    """

    def __init__(self, vocab_size: int = 8, seed: int = 0, sharpness: float = 2.0) -> None:
        self.vocab_size = vocab_size
        self.seed = seed
        self.sharpness = sharpness
        self.calls = 0

    def logprobs(self, prefix: Sequence[int]) -> np.ndarray:
        rng = np.random.default_rng([self.seed, *prefix])
        return log_softmax_array(rng.normal(size=self.vocab_size) * self.sharpness)

    def initial_state(self, src: Sequence[int] | None) -> list[tuple[int, ...]]:
        return [tuple(src or ())]

    def step(
        self, state: list[tuple[int, ...]], prev_tokens: np.ndarray
    ) -> tuple[np.ndarray, list[tuple[int, ...]]]:
        self.calls += 1
        new_state = [
            prefix if int(prev) == BOS_ID else prefix + (int(prev),)
            for prefix, prev in zip(state, prev_tokens)
        ]
        return np.stack([self.logprobs(p) for p in new_state]), new_state

    def select(self, state: list[tuple[int, ...]], rows: Sequence[int]) -> list[tuple[int, ...]]:
        return [state[int(r)] for r in rows]

    def stack(self, states: Sequence[list[tuple[int, ...]]]) -> list[tuple[int, ...]]:
        return [row for s in states for row in s]


@pytest.fixture
def table_scorer():
    """Stub scorer over an 8-token vocabulary."""
    return TableScorer(vocab_size=8, seed=7)


@pytest.fixture
def tiny_model_config():
    """Smallest model that still exercises two-layer stacks."""
    return ModelConfig(vocab_size=12, embed_dim=4, hidden_dim=6, num_layers=2, max_len=8)


@pytest.fixture
def tiny_pair(tiny_model_config):
    """Freshly initialised seq2seq pair."""
    return Seq2SeqPair(tiny_model_config, named_rng(0, INIT_STREAM))


@pytest.fixture
def fast_trainer():
    """Trainer settings that keep every phase to a handful of steps."""
    return BtConfig(
        num_iterations=1,
        pseudo_beam_size=2,
        batch_size=4,
        eval_every=2,
        max_steps_per_phase=3,
        validation_size=4,
        patience=2,
        rng_seed=0,
    )


@pytest.fixture
def optim_config():
    """Default Adam settings."""
    return OptimConfig(learning_rate=0.01)


def _random_sequences(rng: np.random.Generator, count: int, vocab_size: int) -> list[list[int]]:
    return [
        [int(t) for t in rng.integers(4, vocab_size, size=int(rng.integers(1, 5)))]
        for _ in range(count)
    ]


@pytest.fixture
def tiny_paired(tiny_model_config):
    """Eight random context/response pairs over the content ids."""
    rng = np.random.default_rng(11)
    contexts = _random_sequences(rng, 8, tiny_model_config.vocab_size)
    responses = _random_sequences(rng, 8, tiny_model_config.vocab_size)
    return PairedCorpus(list(zip(contexts, responses)), split="train")


@pytest.fixture
def tiny_mono(tiny_model_config):
    """Eight random monologue utterances."""
    rng = np.random.default_rng(12)
    return MonoCorpus(_random_sequences(rng, 8, tiny_model_config.vocab_size))


@pytest.fixture
def sample_paired_lines():
    """Raw context/response text pairs."""
    return [
        ("how are you today", "i am fine thanks"),
        ("what did you eat", "i ate some noodles at the market"),
        ("where are you going", "to the station to meet my sister"),
        ("do you like music", "i do not know"),
    ]


@pytest.fixture
def sample_mono_lines():
    """Raw monologue utterances."""
    return [
        "the market opens early and the noodles sell out before noon",
        "my sister plays the violin every evening",
        "rain again today so the station was crowded",
        "i do not know",
    ]
