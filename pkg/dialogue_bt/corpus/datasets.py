"""Id-level paired and monologue corpora."""

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

from dialogue_bt.exceptions import RejectedInputError

Split = Literal["train", "valid", "test"]

TokenIds = list[int]


def _check(seq: Sequence[int], what: str, index: int, vocab_size: int | None) -> None:
    if not seq:
        raise RejectedInputError(f"{what} {index} is empty")
    if vocab_size is not None and (min(seq) < 0 or max(seq) >= vocab_size):
        raise RejectedInputError(f"{what} {index} has an id outside [0, {vocab_size})")


@dataclass
class PairedCorpus:
    """Conversational pairs (context X_i, response Y_i)."""

    pairs: list[tuple[TokenIds, TokenIds]] = field(default_factory=list)
    split: Split = "train"

    def __post_init__(self) -> None:
        for i, (ctx, resp) in enumerate(self.pairs):
            _check(ctx, "context", i, None)
            _check(resp, "response", i, None)

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def contexts(self) -> list[TokenIds]:
        """All X_i."""
        return [c for c, _ in self.pairs]

    @property
    def responses(self) -> list[TokenIds]:
        """All Y_i."""
        return [r for _, r in self.pairs]

    def validate(self, vocab_size: int) -> None:
        """Check every id against the vocabulary size."""
        for i, (ctx, resp) in enumerate(self.pairs):
            _check(ctx, "context", i, vocab_size)
            _check(resp, "response", i, vocab_size)


@dataclass
class MonoCorpus:
    """Non-conversational utterances T_i."""

    utterances: list[TokenIds] = field(default_factory=list)

    def __post_init__(self) -> None:
        for i, utt in enumerate(self.utterances):
            _check(utt, "utterance", i, None)

    def __len__(self) -> int:
        return len(self.utterances)

    def validate(self, vocab_size: int) -> None:
        """Check every id against the vocabulary size."""
        for i, utt in enumerate(self.utterances):
            _check(utt, "utterance", i, vocab_size)
