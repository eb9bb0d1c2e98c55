"""Dense tensors with define-by-run reverse-mode differentiation.

A ``Tape`` is activated with a ``with`` block; every primitive executed while it is
active and touching a differentiable input is recorded. Outside a tape the same
primitives run as plain numpy arithmetic, which is what decoding uses.
"""

import threading
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from dialogue_bt.exceptions import NumericError, RejectedInputError, ShapeError

BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]

_local = threading.local()


class Tensor:
    """Row-major float64 array, optionally tracked for differentiation."""

    __slots__ = ("data", "requires_grad", "param")

    def __init__(
        self,
        data: Any,
        requires_grad: bool = False,
        param: "Parameter | None" = None,
    ) -> None:
        arr = np.asarray(data, dtype=np.float64)
        if not np.isfinite(arr).all():
            raise NumericError("non-finite value in tensor")
        self.data = arr
        self.requires_grad = requires_grad
        self.param = param

    @property
    def shape(self) -> tuple[int, ...]:
        """Dimension sizes."""
        return self.data.shape

    @property
    def size(self) -> int:
        """Number of elements."""
        return int(self.data.size)

    def item(self) -> float:
        """Return the value of a single-element tensor."""
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        """Return the underlying array (not a copy)."""
        return self.data

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


class Parameter:
    """A trainable tensor together with its gradient and Adam moments."""

    def __init__(self, name: str, value: np.ndarray) -> None:
        """Initialize the parameter.

        Args:
            name: Dotted name used in checkpoints.
            value: Initial value; copied to float64.
        """
        self.name = name
        self.value = Tensor(np.array(value, dtype=np.float64), requires_grad=True, param=self)
        self.grad = np.zeros_like(self.value.data)
        self.adam_m = np.zeros_like(self.value.data)
        self.adam_v = np.zeros_like(self.value.data)
        self.step_count = 0

    @property
    def shape(self) -> tuple[int, ...]:
        """Shape shared by value, grad and both moments."""
        return self.value.shape

    def zero_grad(self) -> None:
        """Reset the accumulated gradient."""
        self.grad.fill(0.0)

    def reset_optimizer_state(self) -> None:
        """Zero both Adam moments and the step counter."""
        self.adam_m.fill(0.0)
        self.adam_v.fill(0.0)
        self.step_count = 0

    def assign(self, value: np.ndarray) -> None:
        """Overwrite the value in place, keeping shape."""
        arr = np.asarray(value, dtype=np.float64)
        if arr.shape != self.shape:
            raise ShapeError(f"{self.name}: expected {self.shape}, got {arr.shape}")
        self.value.data[...] = arr

    def __repr__(self) -> str:
        return f"Parameter({self.name!r}, shape={self.shape})"


@dataclass
class TapeEntry:
    """One executed primitive."""

    kind: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn


class Tape:
    """Ordered record of primitives executed while the tape is active."""

    def __init__(self) -> None:
        self.entries: list[TapeEntry] = []

    def __enter__(self) -> "Tape":
        stack = _tape_stack()
        stack.append(self)
        return self

    def __exit__(self, *exc: object) -> None:
        _tape_stack().pop()

    def __len__(self) -> int:
        return len(self.entries)


def _tape_stack() -> list[Tape]:
    if not hasattr(_local, "stack"):
        _local.stack = []
    return _local.stack


def active_tape() -> Tape | None:
    """Return the innermost active tape on this thread, if any."""
    stack = _tape_stack()
    return stack[-1] if stack else None


def _emit(kind: str, inputs: tuple[Tensor, ...], out: np.ndarray, backward: BackwardFn) -> Tensor:
    tape = active_tape()
    tracked = tape is not None and any(t.requires_grad for t in inputs)
    try:
        result = Tensor(out, requires_grad=tracked)
    except NumericError as exc:
        raise NumericError(f"{kind}: {exc}") from exc
    if tracked:
        tape.entries.append(TapeEntry(kind, inputs, result, backward))  # type: ignore[union-attr]
    return result


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _check_broadcast(kind: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError as exc:
        raise ShapeError(f"{kind}: cannot broadcast {a.shape} with {b.shape}") from exc


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of two 2-D tensors."""
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} @ {b.shape}")
    av, bv = a.data, b.data

    def backward(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return g @ bv.T, av.T @ g

    return _emit("matmul", (a, b), av @ bv, backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum with numpy broadcasting."""
    _check_broadcast("add", a, b)
    sa, sb = a.shape, b.shape

    def backward(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g, sa), _unbroadcast(g, sb)

    return _emit("add", (a, b), a.data + b.data, backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise product with numpy broadcasting."""
    _check_broadcast("mul", a, b)
    av, bv = a.data, b.data

    def backward(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g * bv, av.shape), _unbroadcast(g * av, bv.shape)

    return _emit("mul", (a, b), av * bv, backward)


def scale(a: Tensor, factor: float) -> Tensor:
    """Multiply by a constant."""
    c = float(factor)

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (g * c,)

    return _emit("scale", (a,), a.data * c, backward)


def _stable_sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def sigmoid(a: Tensor) -> Tensor:
    """Elementwise logistic function."""
    s = _stable_sigmoid(a.data)

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (g * s * (1.0 - s),)

    return _emit("sigmoid", (a,), s, backward)


def tanh(a: Tensor) -> Tensor:
    """Elementwise hyperbolic tangent."""
    t = np.tanh(a.data)

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (g * (1.0 - t * t),)

    return _emit("tanh", (a,), t, backward)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    """Concatenate along one axis."""
    if not tensors:
        raise ShapeError("concat: no inputs")
    ndim = tensors[0].data.ndim
    ax = axis % ndim
    for t in tensors:
        if t.data.ndim != ndim or any(
            t.shape[i] != tensors[0].shape[i] for i in range(ndim) if i != ax
        ):
            raise ShapeError(f"concat: mismatched shapes {[x.shape for x in tensors]}")
    bounds = np.cumsum([t.shape[ax] for t in tensors])[:-1]

    def backward(g: np.ndarray) -> list[np.ndarray]:
        return list(np.split(g, bounds, axis=ax))

    return _emit("concat", tuple(tensors), np.concatenate([t.data for t in tensors], axis=ax), backward)


def slice_cols(a: Tensor, start: int, stop: int) -> Tensor:
    """Columns ``start:stop`` of a 2-D tensor."""
    if a.data.ndim != 2 or not 0 <= start < stop <= a.shape[1]:
        raise ShapeError(f"slice_cols: bad range {start}:{stop} for shape {a.shape}")
    shape = a.shape

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        full = np.zeros(shape)
        full[:, start:stop] = g
        return (full,)

    return _emit("slice", (a,), a.data[:, start:stop], backward)


def tensor_sum(a: Tensor) -> Tensor:
    """Sum of all elements as a scalar tensor."""
    shape = a.shape

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (np.full(shape, float(g)),)

    return _emit("sum", (a,), np.array(a.data.sum()), backward)


def softmax_array(logits: np.ndarray) -> np.ndarray:
    """Row softmax of a plain array with max subtraction."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax_array(logits: np.ndarray) -> np.ndarray:
    """Row log-softmax of a plain array via a stable log-sum-exp."""
    m = logits.max(axis=-1, keepdims=True)
    shifted = logits - m
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def row_softmax(a: Tensor) -> Tensor:
    """Softmax over the last axis."""
    s = softmax_array(a.data)

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (s * (g - (g * s).sum(axis=-1, keepdims=True)),)

    return _emit("softmax", (a,), s, backward)


def softmax_cross_entropy(
    logits: Tensor,
    targets: Sequence[int] | np.ndarray,
    weights: Sequence[float] | np.ndarray | None = None,
) -> Tensor:
    """Weighted sum over rows of ``-log softmax(logits)[target]``.

    Args:
        logits: Shape (rows, classes).
        targets: One class index per row.
        weights: Optional per-row weights (masks); defaults to ones.

    Returns:
        Scalar tensor.
    """
    if logits.data.ndim != 2:
        raise ShapeError(f"softmax_cross_entropy: logits must be 2-D, got {logits.shape}")
    rows, classes = logits.shape
    tgt = np.asarray(targets, dtype=np.int64).reshape(-1)
    if tgt.shape[0] != rows:
        raise ShapeError(f"softmax_cross_entropy: {tgt.shape[0]} targets for {rows} rows")
    if rows and (tgt.min() < 0 or tgt.max() >= classes):
        raise RejectedInputError("softmax_cross_entropy: target index out of range")
    w = np.ones(rows) if weights is None else np.asarray(weights, dtype=np.float64).reshape(-1)
    if w.shape[0] != rows:
        raise ShapeError("softmax_cross_entropy: weights length differs from rows")
    logp = log_softmax_array(logits.data)
    picked = logp[np.arange(rows), tgt]
    loss = -(w * picked).sum()

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        probs = np.exp(logp)
        probs[np.arange(rows), tgt] -= 1.0
        return (probs * w[:, None] * float(g),)

    return _emit("softmax_xent", (logits,), np.array(loss), backward)


def embedding(table: Tensor, ids: Sequence[int] | np.ndarray) -> Tensor:
    """Gather rows of ``table`` for a 1-D id vector."""
    idx = np.asarray(ids, dtype=np.int64).reshape(-1)
    vocab = table.shape[0]
    if idx.size and (idx.min() < 0 or idx.max() >= vocab):
        raise RejectedInputError(f"embedding: id out of range for vocabulary of {vocab}")
    shape = table.shape

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        full = np.zeros(shape)
        np.add.at(full, idx, g)
        return (full,)

    return _emit("embedding", (table,), table.data[idx], backward)


def constant(data: Any) -> Tensor:
    """Wrap an array as a non-differentiable tensor."""
    return Tensor(data)


def backward(tape: Tape, loss: Tensor) -> None:
    """Accumulate d(loss)/d(value) into every contributing Parameter's ``grad``.

    Args:
        tape: Tape that recorded the computation of ``loss``.
        loss: Single-element tensor.

    Raises:
        RejectedInputError: If ``loss`` is not a scalar.
    """
    if loss.size != 1:
        raise RejectedInputError(f"backward: loss must be scalar, got shape {loss.shape}")
    if not loss.requires_grad:
        return
    adjoints: dict[int, np.ndarray] = {id(loss): np.ones(loss.shape)}
    for entry in reversed(tape.entries):
        grad = adjoints.pop(id(entry.output), None)
        if grad is None:
            continue
        for inp, g in zip(entry.inputs, entry.backward(grad)):
            if g is None or not inp.requires_grad:
                continue
            if inp.param is not None:
                inp.param.grad += g
            else:
                key = id(inp)
                prev = adjoints.get(key)
                adjoints[key] = g if prev is None else prev + g
    # a loss that is itself a parameter leaf
    if loss.param is not None and id(loss) in adjoints:
        loss.param.grad += adjoints[id(loss)]
