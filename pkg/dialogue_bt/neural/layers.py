"""Embedding, linear and LSTM building blocks."""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from dialogue_bt.numcore import tensor as T
from dialogue_bt.numcore.tensor import Parameter, Tensor

INIT_SCALE = 0.1
FORGET_BIAS = 1.0

LayerState = tuple[Tensor, Tensor]


def uniform_init(rng: np.random.Generator, *shape: int) -> np.ndarray:
    """U(-0.1, 0.1) weights."""
    return rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape)


class Embedding:
    """Token-id to vector lookup table."""

    def __init__(self, name: str, vocab_size: int, dim: int, rng: np.random.Generator) -> None:
        self.table = Parameter(f"{name}.table", uniform_init(rng, vocab_size, dim))

    def __call__(self, ids: Sequence[int] | np.ndarray) -> Tensor:
        return T.embedding(self.table.value, ids)

    def parameters(self) -> list[Parameter]:
        """Trainable parameters."""
        return [self.table]


class Linear:
    """Affine map ``x @ W + b``."""

    def __init__(self, name: str, in_dim: int, out_dim: int, rng: np.random.Generator) -> None:
        self.weight = Parameter(f"{name}.weight", uniform_init(rng, in_dim, out_dim))
        self.bias = Parameter(f"{name}.bias", np.zeros(out_dim))

    def __call__(self, x: Tensor) -> Tensor:
        return T.add(T.matmul(x, self.weight.value), self.bias.value)

    def parameters(self) -> list[Parameter]:
        """Trainable parameters."""
        return [self.weight, self.bias]


class LSTMCell:
    """Single LSTM layer with gates ordered input, forget, cell, output."""

    def __init__(self, name: str, in_dim: int, hidden_dim: int, rng: np.random.Generator) -> None:
        self.hidden_dim = hidden_dim
        self.weight = Parameter(
            f"{name}.weight", uniform_init(rng, in_dim + hidden_dim, 4 * hidden_dim)
        )
        bias = np.zeros(4 * hidden_dim)
        bias[hidden_dim : 2 * hidden_dim] = FORGET_BIAS
        self.bias = Parameter(f"{name}.bias", bias)

    def step(self, x: Tensor, h: Tensor, c: Tensor) -> LayerState:
        """Advance one time step.

        Args:
            x: Input, shape (batch, in_dim).
            h: Previous hidden state, shape (batch, hidden).
            c: Previous cell state, shape (batch, hidden).

        Returns:
            New (h, c).
        """
        H = self.hidden_dim
        z = T.add(T.matmul(T.concat([x, h], axis=-1), self.weight.value), self.bias.value)
        i = T.sigmoid(T.slice_cols(z, 0, H))
        f = T.sigmoid(T.slice_cols(z, H, 2 * H))
        g = T.tanh(T.slice_cols(z, 2 * H, 3 * H))
        o = T.sigmoid(T.slice_cols(z, 3 * H, 4 * H))
        c_new = T.add(T.mul(f, c), T.mul(i, g))
        h_new = T.mul(o, T.tanh(c_new))
        return h_new, c_new

    def parameters(self) -> list[Parameter]:
        """Trainable parameters."""
        return [self.weight, self.bias]


class LSTMStack:
    """Multi-layer LSTM; layer k > 0 consumes the hidden state of layer k - 1."""

    def __init__(
        self,
        name: str,
        in_dim: int,
        hidden_dim: int,
        num_layers: int,
        rng: np.random.Generator,
    ) -> None:
        self.hidden_dim = hidden_dim
        self.cells = [
            LSTMCell(f"{name}.{k}", in_dim if k == 0 else hidden_dim, hidden_dim, rng)
            for k in range(num_layers)
        ]

    @property
    def num_layers(self) -> int:
        """Number of stacked layers."""
        return len(self.cells)

    def zero_state(self, batch: int) -> list[LayerState]:
        """All-zero (h, c) for each layer."""
        return [
            (T.constant(np.zeros((batch, self.hidden_dim))), T.constant(np.zeros((batch, self.hidden_dim))))
            for _ in self.cells
        ]

    def step(self, x: Tensor, states: Sequence[LayerState]) -> tuple[Tensor, list[LayerState]]:
        """Run one time step through every layer.

        Returns:
            Top-layer hidden state and the new per-layer states.
        """
        new_states = []
        inp = x
        for cell, (h, c) in zip(self.cells, states):
            h, c = cell.step(inp, h, c)
            new_states.append((h, c))
            inp = h
        return inp, new_states

    def parameters(self) -> list[Parameter]:
        """Trainable parameters."""
        return [p for cell in self.cells for p in cell.parameters()]


def masked_update(
    new: Sequence[LayerState], old: Sequence[LayerState], mask: np.ndarray
) -> list[LayerState]:
    """Keep ``old`` rows where ``mask`` is 0 and take ``new`` rows where it is 1."""
    if mask.all():
        return list(new)
    keep = T.constant(mask.reshape(-1, 1))
    hold = T.constant(1.0 - mask.reshape(-1, 1))
    return [
        (T.add(T.mul(hn, keep), T.mul(ho, hold)), T.add(T.mul(cn, keep), T.mul(co, hold)))
        for (hn, cn), (ho, co) in zip(new, old)
    ]


@dataclass
class DecoderState:
    """Per-layer (h, c) plus the encoder summary fed to every decoder step."""

    layers: list[LayerState]
    context: Tensor | None = None

    @property
    def batch_size(self) -> int:
        """Rows in the state."""
        return self.layers[0][0].shape[0]

    def select(self, rows: Sequence[int] | np.ndarray) -> "DecoderState":
        """Gather rows into a new, untracked state."""
        idx = np.asarray(rows, dtype=np.int64)
        layers = [(T.constant(h.data[idx]), T.constant(c.data[idx])) for h, c in self.layers]
        context = None if self.context is None else T.constant(self.context.data[idx])
        return DecoderState(layers, context)

    @staticmethod
    def stack(states: Sequence["DecoderState"]) -> "DecoderState":
        """Concatenate single- or multi-row states along the batch axis."""
        num_layers = len(states[0].layers)
        layers = [
            (
                T.constant(np.concatenate([s.layers[k][0].data for s in states], axis=0)),
                T.constant(np.concatenate([s.layers[k][1].data for s in states], axis=0)),
            )
            for k in range(num_layers)
        ]
        context = None
        if states[0].context is not None:
            context = T.constant(np.concatenate([s.context.data for s in states], axis=0))  # type: ignore[union-attr]
        return DecoderState(layers, context)


def encode_sequences(
    embedding: Embedding, lstm: LSTMStack, ids: np.ndarray, mask: np.ndarray
) -> list[LayerState]:
    """Run ``lstm`` over a padded batch; each row's state stops at its last real token.

    Args:
        embedding: Input lookup table.
        lstm: Encoder stack.
        ids: Token ids, shape (batch, time).
        mask: 1.0 for real tokens, 0.0 for padding.
    """
    states = lstm.zero_state(ids.shape[0])
    for t in range(ids.shape[1]):
        _, new_states = lstm.step(embedding(ids[:, t]), states)
        states = masked_update(new_states, states, mask[:, t])
    return states
