"""How much of a model's output comes from the non-conversational corpus."""

from collections.abc import Hashable, Sequence

from dialogue_bt.evaluation.metrics import ngrams
from dialogue_bt.exceptions import RejectedInputError

Tokens = Sequence[Hashable]


def _ngram_set(sequences: Sequence[Tokens], n: int) -> set[tuple[Hashable, ...]]:
    found: set[tuple[Hashable, ...]] = set()
    for seq in sequences:
        found.update(ngrams(seq, n))
    return found


def novelty_rates(
    generations: Sequence[Tokens],
    paired_responses: Sequence[Tokens],
    mono_utterances: Sequence[Tokens],
    n: int = 2,
) -> tuple[float, float]:
    """Novel-phrase rate and copy rate of ``generations``.

    A generation is novel when it has at least one n-gram that never occurs in the
    paired responses but does occur in the monologue corpus. It is a copy when it equals
    some monologue utterance token for token.

    Returns:
        ``(novel_rate, copy_rate)``, both fractions of ``len(generations)``.

    Raises:
        RejectedInputError: ``generations`` is empty or ``n`` < 1.
    """
    if not generations:
        raise RejectedInputError("novelty_rates needs at least one generation")
    if n < 1:
        raise RejectedInputError(f"n must be at least 1, got {n}")
    seen_in_dialogue = _ngram_set(paired_responses, n)
    seen_in_mono = _ngram_set(mono_utterances, n) - seen_in_dialogue
    mono_exact = {tuple(u) for u in mono_utterances}

    novel = copies = 0
    for gen in generations:
        if any(g in seen_in_mono for g in ngrams(gen, n)):
            novel += 1
        if tuple(gen) in mono_exact:
            copies += 1
    total = len(generations)
    return novel / total, copies / total
