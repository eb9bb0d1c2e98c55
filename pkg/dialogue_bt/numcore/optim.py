"""Adam with bias correction and global-norm gradient clipping."""

from collections.abc import Iterable, Sequence

import numpy as np

from dialogue_bt.exceptions import ConfigError, NumericError
from dialogue_bt.numcore.tensor import Parameter

# Learning rate reported for the full-scale models; too aggressive for desk-scale runs.
PUBLISHED_LEARNING_RATE = 0.15


def global_norm(arrays: Iterable[np.ndarray]) -> float:
    """L2 norm over the concatenation of all arrays."""
    total = 0.0
    for arr in arrays:
        total += float(np.dot(arr.ravel(), arr.ravel()))
    return float(np.sqrt(total))


def clip_global_norm(grads: Sequence[np.ndarray], max_norm: float = 5.0) -> float:
    """Scale ``grads`` in place so their global L2 norm is at most ``max_norm``.

    Args:
        grads: Gradient arrays, modified in place.
        max_norm: Threshold; must be positive.

    Returns:
        The norm measured before clipping.
    """
    if max_norm <= 0:
        raise ConfigError(f"max_norm must be positive, got {max_norm}")
    norm = global_norm(grads)
    if norm > max_norm:
        factor = max_norm / norm
        for g in grads:
            g *= factor
    return norm


def adam_step(
    params: Sequence[Parameter],
    learning_rate: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """Apply one bias-corrected Adam update to every parameter, then zero grads.

    The whole group is rejected if any gradient is non-finite.

    Raises:
        NumericError: A gradient contains NaN or Inf; no parameter is updated.
    """
    for p in params:
        if not np.isfinite(p.grad).all():
            raise NumericError(f"non-finite gradient for {p.name}; update skipped")
    for p in params:
        p.step_count += 1
        t = p.step_count
        g = p.grad
        p.adam_m *= beta1
        p.adam_m += (1.0 - beta1) * g
        p.adam_v *= beta2
        p.adam_v += (1.0 - beta2) * g * g
        m_hat = p.adam_m / (1.0 - beta1**t)
        v_hat = p.adam_v / (1.0 - beta2**t)
        p.value.data -= learning_rate * m_hat / (np.sqrt(v_hat) + eps)
        p.zero_grad()


class Adam:
    """Adam optimizer over a fixed parameter group.

    Example:
        >>> opt = Adam(pair.direction_parameters("forward"), learning_rate=0.01, max_grad_norm=5.0)
        >>> opt.step()
    """

    def __init__(
        self,
        params: Iterable[Parameter],
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        max_grad_norm: float | None = 5.0,
    ) -> None:
        self.params = list(params)
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.max_grad_norm = max_grad_norm

    def reset(self) -> None:
        """Zero the moments of every parameter in the group."""
        for p in self.params:
            p.reset_optimizer_state()

    def zero_grad(self) -> None:
        """Zero every gradient in the group."""
        for p in self.params:
            p.zero_grad()

    def step(self) -> float:
        """Clip, update and zero gradients.

        Returns:
            Global gradient norm before clipping.
        """
        grads = [p.grad for p in self.params]
        norm = global_norm(grads)
        if not np.isfinite(norm):
            raise NumericError("non-finite gradient norm; update skipped")
        if self.max_grad_norm is not None:
            clip_global_norm(grads, self.max_grad_norm)
        adam_step(self.params, self.learning_rate, self.beta1, self.beta2, self.eps)
        return norm
