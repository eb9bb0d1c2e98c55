"""Corpus-level n-gram metrics: Dist-n, Ent-n and BLEU-2."""

import math
from collections import Counter
from collections.abc import Hashable, Sequence
from dataclasses import dataclass, field

from dialogue_bt.exceptions import RejectedInputError, UndefinedMetricError

Tokens = Sequence[Hashable]


def ngrams(tokens: Tokens, n: int) -> list[tuple[Hashable, ...]]:
    """All contiguous n-grams of one sequence (empty if shorter than n)."""
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


@dataclass
class NGramTable:
    """Pooled n-gram counts over a set of sequences."""

    n: int
    counts: Counter = field(default_factory=Counter)

    @property
    def total(self) -> int:
        """Number of n-gram tokens."""
        return sum(self.counts.values())

    @property
    def distinct(self) -> int:
        """Number of distinct n-grams."""
        return len(self.counts)

    @classmethod
    def from_sequences(cls, sequences: Sequence[Tokens], n: int) -> "NGramTable":
        """Count n-grams pooled across ``sequences``."""
        if n < 1:
            raise RejectedInputError(f"n must be at least 1, got {n}")
        table = cls(n=n)
        for seq in sequences:
            table.counts.update(ngrams(seq, n))
        return table


def _table_or_raise(responses: Sequence[Tokens], n: int) -> NGramTable:
    table = NGramTable.from_sequences(responses, n)
    if table.total == 0:
        raise UndefinedMetricError(f"no {n}-grams in {len(responses)} responses")
    return table


def dist_n(responses: Sequence[Tokens], n: int) -> float:
    """Distinct n-grams divided by total n-grams, pooled over all responses.

    Raises:
        UndefinedMetricError: No response has at least ``n`` tokens.
    """
    table = _table_or_raise(responses, n)
    return table.distinct / table.total


def ent_n(responses: Sequence[Tokens], n: int = 4) -> float:
    """Entropy (nats) of the pooled empirical n-gram distribution.

    Raises:
        UndefinedMetricError: No response has at least ``n`` tokens.
    """
    table = _table_or_raise(responses, n)
    total = table.total
    return -math.fsum((c / total) * math.log(c / total) for c in table.counts.values())


def _clipped_counts(hyp: Tokens, ref: Tokens, n: int) -> tuple[int, int]:
    hyp_counts = Counter(ngrams(hyp, n))
    ref_counts = Counter(ngrams(ref, n))
    clipped = sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
    return clipped, sum(hyp_counts.values())


def bleu2(hypotheses: Sequence[Tokens], references: Sequence[Tokens]) -> float:
    """Corpus-level BLEU with uniform weights on 1- and 2-gram precisions.

    Clipped counts are pooled over the corpus before forming precisions, combined by a
    geometric mean and multiplied by the standard brevity penalty. Any zero precision
    yields 0, including an order with no hypothesis n-grams at all, so a corpus of
    single-token hypotheses scores 0.

    Raises:
        RejectedInputError: Empty or length-mismatched inputs.
    """
    if not hypotheses or len(hypotheses) != len(references):
        raise RejectedInputError("bleu2 needs equal-length, non-empty hypothesis/reference lists")
    log_precisions = []
    for n in (1, 2):
        matched = total = 0
        for hyp, ref in zip(hypotheses, references):
            m, t = _clipped_counts(hyp, ref, n)
            matched += m
            total += t
        if matched == 0:
            return 0.0
        log_precisions.append(math.log(matched / total))
    hyp_len = sum(len(h) for h in hypotheses)
    ref_len = sum(len(r) for r in references)
    brevity = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    return brevity * math.exp(math.fsum(log_precisions) / len(log_precisions))
