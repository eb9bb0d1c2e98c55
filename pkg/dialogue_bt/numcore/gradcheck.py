"""Central finite-difference checks of reverse-mode gradients."""

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from dialogue_bt.numcore import tensor as T
from dialogue_bt.numcore.tensor import Parameter, Tape, Tensor

DEFAULT_STEP = 1e-5
DEFAULT_TOLERANCE = 1e-4


@dataclass
class GradCheckResult:
    """Outcome of one gradient check."""

    name: str
    seed: int
    max_relative_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        """Whether the error is within tolerance."""
        return self.max_relative_error < self.tolerance

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary."""
        return {
            "name": self.name,
            "seed": self.seed,
            "max_relative_error": self.max_relative_error,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """``|a - n| / max(|a| + |n|, 1e-8)`` over whole vectors."""
    diff = float(np.linalg.norm(analytic - numeric))
    denom = float(np.linalg.norm(analytic) + np.linalg.norm(numeric))
    return diff / max(denom, 1e-8)


def check_gradients(
    name: str,
    params: Sequence[Parameter],
    loss_fn: Callable[[], Tensor],
    seed: int = 0,
    step: float = DEFAULT_STEP,
    tolerance: float = DEFAULT_TOLERANCE,
    max_entries: int | None = None,
) -> GradCheckResult:
    """Compare autodiff gradients of ``loss_fn`` with central differences.

    Args:
        name: Label for the result.
        params: Parameters to perturb.
        loss_fn: Rebuilds the scalar loss from current parameter values.
        seed: Seed used when sub-sampling coordinates.
        step: Finite-difference step h.
        tolerance: Relative error bound.
        max_entries: If set, check at most this many coordinates per parameter.

    Returns:
        GradCheckResult with the worst relative error over all parameters.
    """
    for p in params:
        p.zero_grad()
    with Tape() as tape:
        loss = loss_fn()
    T.backward(tape, loss)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for p in params:
        flat = p.value.data.reshape(-1)
        coords = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            coords = np.sort(rng.choice(flat.size, size=max_entries, replace=False))
        numeric = np.empty(coords.size)
        for k, i in enumerate(coords):
            orig = flat[i]
            flat[i] = orig + step
            up = loss_fn().item()
            flat[i] = orig - step
            down = loss_fn().item()
            flat[i] = orig
            numeric[k] = (up - down) / (2.0 * step)
        analytic = p.grad.reshape(-1)[coords]
        worst = max(worst, relative_error(analytic, numeric))
        p.zero_grad()
    return GradCheckResult(name=name, seed=seed, max_relative_error=worst, tolerance=tolerance)


def _uniform(rng: np.random.Generator, *shape: int) -> np.ndarray:
    return rng.uniform(-0.5, 0.5, size=shape)


def check_primitives(seed: int, tolerance: float = DEFAULT_TOLERANCE) -> list[GradCheckResult]:
    """Gradient-check every primitive on random inputs drawn U(-0.5, 0.5)."""
    rng = np.random.default_rng(seed)
    a = Parameter("a", _uniform(rng, 3, 4))
    b = Parameter("b", _uniform(rng, 4, 5))
    c = Parameter("c", _uniform(rng, 3, 4))
    bias = Parameter("bias", _uniform(rng, 4))
    table = Parameter("table", _uniform(rng, 6, 4))
    weights = _uniform(rng, 3, 5)
    targets = rng.integers(0, 5, size=3)
    ids = rng.integers(0, 6, size=4)
    mask = rng.integers(0, 2, size=3).astype(float)

    def project(t: Tensor) -> Tensor:
        # random weighted sum of the output
        w = T.constant(rng_weights(t.shape))
        return T.tensor_sum(T.mul(t, w))

    fixed = np.random.default_rng(seed + 1)
    cache: dict[tuple[int, ...], np.ndarray] = {}

    def rng_weights(shape: tuple[int, ...]) -> np.ndarray:
        if shape not in cache:
            cache[shape] = fixed.uniform(-1.0, 1.0, size=shape)
        return cache[shape]

    cases: list[tuple[str, list[Parameter], Callable[[], Tensor]]] = [
        ("matmul", [a, b], lambda: project(T.matmul(a.value, b.value))),
        ("add", [a, c], lambda: project(T.add(a.value, c.value))),
        ("broadcast_add", [a, bias], lambda: project(T.add(a.value, bias.value))),
        ("mul", [a, c], lambda: project(T.mul(a.value, c.value))),
        ("sigmoid", [a], lambda: project(T.sigmoid(a.value))),
        ("tanh", [a], lambda: project(T.tanh(a.value))),
        ("concat", [a, c], lambda: project(T.concat([a.value, c.value], axis=-1))),
        ("slice", [a], lambda: project(T.slice_cols(a.value, 1, 3))),
        ("row_softmax", [a], lambda: project(T.row_softmax(a.value))),
        (
            "softmax_cross_entropy",
            [a, b],
            lambda: T.softmax_cross_entropy(
                T.add(T.matmul(a.value, b.value), T.constant(weights)), targets, mask
            ),
        ),
        ("embedding", [table], lambda: project(T.embedding(table.value, ids))),
    ]
    return [check_gradients(name, ps, fn, seed=seed, tolerance=tolerance) for name, ps, fn in cases]
