"""Gradient checks of the composed models on top of the primitive checks."""

from collections.abc import Iterable

import numpy as np

from dialogue_bt.models.schemas import ModelConfig
from dialogue_bt.neural.discriminator import Discriminator
from dialogue_bt.neural.language_model import LanguageModel
from dialogue_bt.neural.seq2seq import BACKWARD, FORWARD, Seq2SeqPair
from dialogue_bt.numcore import tensor as T
from dialogue_bt.numcore.gradcheck import (
    DEFAULT_TOLERANCE,
    GradCheckResult,
    check_gradients,
    check_primitives,
)
from dialogue_bt.numcore.rng import named_rng
from dialogue_bt.numcore.tensor import Parameter

GRADCHECK_CONFIG = ModelConfig(vocab_size=8, embed_dim=3, hidden_dim=4, num_layers=2, max_len=6)
COORDS_PER_PARAMETER = 8


def _redraw(params: Iterable[Parameter], rng: np.random.Generator) -> None:
    for p in params:
        p.assign(rng.uniform(-0.5, 0.5, size=p.shape))


def check_composed_models(
    seed: int, tolerance: float = DEFAULT_TOLERANCE
) -> list[GradCheckResult]:
    """Check the teacher-forced pair loss, the LM loss and the discriminator loss."""
    rng = named_rng(seed, "gradcheck")
    config = GRADCHECK_CONFIG
    srcs = [[4, 5, 6], [7, 3]]
    tgts = [[5, 7], [4, 4, 6, 2]]

    pair = Seq2SeqPair(config, rng)
    _redraw(pair.parameters(), rng)

    def pair_loss() -> T.Tensor:
        fwd, _ = pair.batch_nll(srcs, tgts, FORWARD)
        bwd, _ = pair.batch_nll(tgts, srcs, BACKWARD)
        return T.add(fwd, bwd)

    lm = LanguageModel(config, rng)
    _redraw(lm.parameters(), rng)

    disc = Discriminator(config, rng)
    _redraw(disc.parameters(), rng)

    cases = [
        ("seq2seq_pair", pair.parameters(), pair_loss),
        ("language_model", lm.parameters(), lambda: lm.batch_nll(tgts)[0]),
        ("discriminator", disc.parameters(), lambda: disc.batch_loss(srcs, tgts, [1, 0])),
    ]
    return [
        check_gradients(
            name, params, fn, seed=seed, tolerance=tolerance, max_entries=COORDS_PER_PARAMETER
        )
        for name, params, fn in cases
    ]


def run_gradient_suite(
    seeds: Iterable[int], tolerance: float = DEFAULT_TOLERANCE
) -> list[GradCheckResult]:
    """Primitive and composed-model gradient checks for every seed."""
    results: list[GradCheckResult] = []
    for seed in seeds:
        results.extend(check_primitives(seed, tolerance))
        results.extend(check_composed_models(seed, tolerance))
    return results
