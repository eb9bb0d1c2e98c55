"""Length, blocklist and metadata filtering of utterances."""

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

from dialogue_bt.corpus.text import is_cjk, tokenize
from dialogue_bt.models.schemas import FilterConfig

REASON_TOO_SHORT = "too_short"
REASON_TOO_LONG = "too_long"
REASON_BLOCKLIST = "blocklist"
REASON_LIKES = "likes"


@dataclass
class FilterResult:
    """Kept utterances and why the others were rejected."""

    kept: list[list[str]] = field(default_factory=list)
    kept_indices: list[int] = field(default_factory=list)
    rejected: dict[int, str] = field(default_factory=dict)

    @property
    def stats(self) -> dict[str, int]:
        """Counts per outcome; ``kept`` plus all reasons equals the input count."""
        counts = {
            "input": len(self.kept) + len(self.rejected),
            "kept": len(self.kept),
            REASON_TOO_SHORT: 0,
            REASON_TOO_LONG: 0,
            REASON_BLOCKLIST: 0,
            REASON_LIKES: 0,
        }
        for reason in self.rejected.values():
            counts[reason] += 1
        return counts

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary."""
        return {"stats": self.stats, "rejected": {str(k): v for k, v in self.rejected.items()}}


def _fold(token: str) -> str:
    return token if all(is_cjk(ch) for ch in token) else token.casefold()


def _contains(tokens: Sequence[str], phrase: Sequence[str]) -> bool:
    n = len(phrase)
    return any(list(tokens[i : i + n]) == list(phrase) for i in range(len(tokens) - n + 1))


class UtteranceFilter:
    """Keeps utterances of acceptable length that contain no blocklisted phrase.

    Blocklist matching is exact contiguous token-sequence matching after tokenization,
    case-folded for non-CJK tokens.
    """

    def __init__(self, config: FilterConfig) -> None:
        """Initialize the filter.

        Args:
            config: Length bounds, blocklist and optional likes threshold.
        """
        self.config = config
        self._phrases = [
            [_fold(t) for t in tokenize(phrase)] for phrase in config.blocklist if tokenize(phrase)
        ]

    def reason(self, tokens: Sequence[str], likes: int | None = None) -> str | None:
        """Rejection reason for one utterance, or None when it is kept."""
        if len(tokens) < self.config.min_tokens:
            return REASON_TOO_SHORT
        if len(tokens) > self.config.max_tokens:
            return REASON_TOO_LONG
        folded = [_fold(t) for t in tokens]
        if any(_contains(folded, phrase) for phrase in self._phrases):
            return REASON_BLOCKLIST
        if self.config.min_likes is not None and likes is not None and likes < self.config.min_likes:
            return REASON_LIKES
        return None

    def apply(
        self,
        utterances: Sequence[Sequence[str]],
        likes: Sequence[int | None] | None = None,
    ) -> FilterResult:
        """Filter tokenized utterances.

        Args:
            utterances: Token lists.
            likes: Optional per-utterance like counts (None entries skip the check).
        """
        result = FilterResult()
        for i, tokens in enumerate(utterances):
            reason = self.reason(tokens, likes[i] if likes is not None else None)
            if reason is None:
                result.kept.append(list(tokens))
                result.kept_indices.append(i)
            else:
                result.rejected[i] = reason
        return result


def filter_corpus(
    utterances: Sequence[Sequence[str]],
    config: FilterConfig,
    likes: Sequence[int | None] | None = None,
) -> FilterResult:
    """Apply :class:`UtteranceFilter` once."""
    return UtteranceFilter(config).apply(utterances, likes)
