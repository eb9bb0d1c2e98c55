"""Retrieval baseline: embedding prefilter over D_T, then backward-model rerank."""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np
from sklearn.preprocessing import normalize

from dialogue_bt.corpus.batching import truncate
from dialogue_bt.corpus.vocab import EOS_ID
from dialogue_bt.exceptions import RejectedInputError
from dialogue_bt.log import get_logger

if TYPE_CHECKING:
    from dialogue_bt.neural.seq2seq import Seq2SeqPair

logger = get_logger(__name__)

DEFAULT_PREFILTER_K = 200


def mean_embedding(table: np.ndarray, ids: Sequence[int]) -> np.ndarray:
    """Average of the embedding rows of ``ids``."""
    return table[np.asarray(ids, dtype=np.int64)].mean(axis=0)


@dataclass
class RetrievalResult:
    """The chosen candidate and how it was ranked."""

    index: int
    tokens: list[int]
    backward_logprob: float
    prefiltered: int

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary."""
        return {
            "index": self.index,
            "tokens": self.tokens,
            "backward_logprob": self.backward_logprob,
            "prefiltered": self.prefiltered,
        }


class RetrievalIndex:
    """Unit-normalised mean-embedding vectors for every candidate utterance.

    Example:
        >>> index = RetrievalIndex.build(pair, mono.utterances)
        >>> index.search([4, 9, 12], k=5)
    """

    def __init__(self, candidates: Sequence[Sequence[int]], vectors: np.ndarray, k: int) -> None:
        self.candidates = [list(c) for c in candidates]
        self.vectors = vectors
        self.k = k

    def __len__(self) -> int:
        return len(self.candidates)

    @classmethod
    def build(
        cls,
        pair: "Seq2SeqPair",
        candidates: Sequence[Sequence[int]],
        k: int = DEFAULT_PREFILTER_K,
    ) -> "RetrievalIndex":
        """Embed candidates with the pair's shared input embedding."""
        table = pair.embedding.table.value.data
        if candidates:
            raw = np.stack([mean_embedding(table, c) for c in candidates])
            vectors = normalize(raw, norm="l2", axis=1)
        else:
            vectors = np.zeros((0, table.shape[1]))
        logger.info("retrieval_index_built", candidates=len(candidates), dim=table.shape[1], k=k)
        return cls(candidates, vectors, k)

    def query_vector(self, table: np.ndarray, ids: Sequence[int]) -> np.ndarray:
        """Unit-normalised mean embedding of a query."""
        return normalize(mean_embedding(table, ids).reshape(1, -1), norm="l2", axis=1)[0]

    def search_vector(self, query: np.ndarray, k: int) -> list[int]:
        """Indices of the ``k`` highest-cosine candidates, ties by lower index."""
        if not len(self):
            raise RejectedInputError("retrieval index is empty")
        scores = self.vectors @ query
        order = np.lexsort((np.arange(len(self)), -scores))
        return [int(i) for i in order[:k]]


def retrieve_respond(
    index: RetrievalIndex,
    backward_pair: "Seq2SeqPair",
    context: Sequence[int],
    k: int | None = None,
) -> RetrievalResult:
    """Pick the candidate maximising log P_b(context | candidate) among the cosine top-k.

    Raises:
        RejectedInputError: Empty index or invalid context.
    """
    if not len(index):
        raise RejectedInputError("retrieval index is empty")
    vocab = backward_pair.config.vocab_size
    if not context or min(context) < 0 or max(context) >= vocab:
        raise RejectedInputError(f"context must be non-empty with ids in [0, {vocab})")
    k = index.k if k is None else k
    max_len = backward_pair.config.max_len
    table = backward_pair.embedding.table.value.data
    shortlist = sorted(index.search_vector(index.query_vector(table, context), k))
    target = truncate(context, max_len) + [EOS_ID]
    best_i, best_score = -1, -np.inf
    for i in shortlist:
        score = backward_pair.sequence_logprob(truncate(index.candidates[i], max_len), target, "backward")
        if score > best_score:
            best_i, best_score = i, score
    return RetrievalResult(
        index=best_i,
        tokens=list(index.candidates[best_i]),
        backward_logprob=float(best_score),
        prefiltered=len(shortlist),
    )
