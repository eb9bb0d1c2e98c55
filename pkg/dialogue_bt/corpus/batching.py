"""Truncation, padding and batch iteration."""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Generic, TypeVar

import numpy as np

from dialogue_bt.corpus.vocab import BOS_ID, EOS_ID, PAD_ID

Item = TypeVar("Item")


@dataclass
class Batch:
    """Padded id matrix with its mask."""

    ids: np.ndarray
    mask: np.ndarray

    @property
    def lengths(self) -> list[int]:
        """True length of each row."""
        return [int(n) for n in self.mask.sum(axis=1)]

    @property
    def size(self) -> int:
        """Number of rows."""
        return int(self.ids.shape[0])


def pad_sequences(seqs: Sequence[Sequence[int]], pad_id: int = PAD_ID) -> tuple[np.ndarray, np.ndarray]:
    """Right-pad sequences to the longest one.

    Returns:
        ids of shape (batch, longest) and a float mask with 1.0 on real tokens.
    """
    width = max((len(s) for s in seqs), default=0)
    ids = np.full((len(seqs), width), pad_id, dtype=np.int64)
    mask = np.zeros((len(seqs), width))
    for row, seq in enumerate(seqs):
        ids[row, : len(seq)] = seq
        mask[row, : len(seq)] = 1.0
    return ids, mask


def truncate(seq: Sequence[int], max_len: int = 50) -> list[int]:
    """Keep at most the first ``max_len`` tokens."""
    return list(seq[:max_len])


def truncate_and_batch(
    sequences: Sequence[Sequence[int]],
    max_len: int = 50,
    batch_size: int = 16,
) -> list[Batch]:
    """Truncate, chunk in input order and pad each chunk to its own maximum.

    Args:
        sequences: Token-id sequences.
        max_len: Truncation length.
        batch_size: Rows per batch (the last batch may be smaller).

    Returns:
        Padded batches with masks excluding PAD positions.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be at least 1")
    cut = [truncate(s, max_len) for s in sequences]
    batches = []
    for start in range(0, len(cut), batch_size):
        ids, mask = pad_sequences(cut[start : start + batch_size])
        batches.append(Batch(ids=ids, mask=mask))
    return batches


def teacher_forcing_arrays(
    targets: Sequence[Sequence[int]],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Decoder inputs ``BOS + y``, outputs ``y + EOS`` and their loss weights.

    Returns:
        (inputs, outputs, weights), each of shape (batch, longest + 1).
    """
    width = max(len(t) for t in targets) + 1
    dec_in = np.full((len(targets), width), PAD_ID, dtype=np.int64)
    dec_out = np.full((len(targets), width), PAD_ID, dtype=np.int64)
    weights = np.zeros((len(targets), width))
    for row, tgt in enumerate(targets):
        n = len(tgt)
        dec_in[row, 0] = BOS_ID
        dec_in[row, 1 : n + 1] = tgt
        dec_out[row, :n] = tgt
        dec_out[row, n] = EOS_ID
        weights[row, : n + 1] = 1.0
    return dec_in, dec_out, weights


class BatchStream(Generic[Item]):
    """Endless mini-batches, one shuffled pass over ``items`` per epoch.

    Example:
        >>> stream = BatchStream(pairs, batch_size=16, rng=named_rng(0, "data-shuffle"))
        >>> batch = stream.next_batch()
    """

    def __init__(self, items: Sequence[Item], batch_size: int, rng: np.random.Generator) -> None:
        if not items:
            raise ValueError("BatchStream needs at least one item")
        self._items = list(items)
        self._batch_size = batch_size
        self._rng = rng
        self._order: list[int] = []
        self._cursor = 0
        self.epoch = 0

    def next_batch(self) -> list[Item]:
        """Return the next batch, reshuffling at every epoch boundary."""
        if self._cursor >= len(self._order):
            self._order = [int(i) for i in self._rng.permutation(len(self._items))]
            self._cursor = 0
            self.epoch += 1
        chunk = self._order[self._cursor : self._cursor + self._batch_size]
        self._cursor += self._batch_size
        return [self._items[i] for i in chunk]
