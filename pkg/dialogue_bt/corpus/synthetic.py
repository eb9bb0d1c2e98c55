"""Synthetic diversity-gap corpora for desk-scale experiments.

Paired responses come from a low-entropy distribution dominated by a handful of generic
replies; monologues come from a richer grammar that shares topic words with the
contexts. The generator guarantees a minimum Ent-4 gap between the two.
"""

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from dialogue_bt.corpus.text import tokenize
from dialogue_bt.evaluation.metrics import ent_n
from dialogue_bt.exceptions import ConfigError
from dialogue_bt.log import get_logger
from dialogue_bt.models.schemas import SynthSpec
from dialogue_bt.numcore.rng import named_rng

logger = get_logger(__name__)

TOPIC_NOUNS: dict[str, list[str]] = {
    "food": ["pizza", "noodles", "soup", "bread", "cake", "rice"],
    "travel": ["train", "beach", "city", "mountain", "island", "road"],
    "music": ["guitar", "song", "piano", "concert", "drum", "band"],
    "sport": ["football", "tennis", "race", "pool", "match", "team"],
    "work": ["office", "boss", "meeting", "project", "deadline", "salary"],
    "weather": ["rain", "snow", "sun", "wind", "storm", "cloud"],
    "pets": ["cat", "dog", "rabbit", "parrot", "puppy", "kitten"],
    "study": ["exam", "book", "teacher", "lesson", "library", "essay"],
}

CONTEXT_TEMPLATES = [
    "i saw the {n1} today",
    "what do you think about the {n1}",
    "my {n1} was {adj} this week",
    "do you like the {n1} and the {n2}",
    "the {n1} made me {feel} again",
]

GENERIC_RESPONSES = [
    ("i do not know", 0.40),
    ("haha me too lol", 0.20),
    ("that is so true", 0.15),
    ("sounds good to me", 0.10),
    ("i see what you mean", 0.10),
    ("ok ok ok ok", 0.05),
]

SPECIFIC_RESPONSES = [
    "the {n1} is {adj}",
    "i like the {n1} too",
]

MONOLOGUE_TEMPLATES = [
    "when the {n1} is {adj} i always feel {feel} and think about the {n2}",
    "to love a {n1} is easy but to forget the {n2} is really hard",
    "every {n1} has its own {quality} and every {n2} has its own {quality2}",
    "{adj} {n1} and {adj2} {n2} are the best part of a {time} for me",
    "nobody told me that a {n1} could be so {adj} on a {time} like this",
    "i keep a {adj} {n1} near my {n2} because it makes me {feel} every {time}",
]

ADJECTIVES = [
    "lovely", "strange", "quiet", "bright", "heavy", "gentle", "wild", "tiny",
    "golden", "bitter", "sweet", "lonely", "noisy", "ancient", "fresh", "silver",
]
FEELINGS = ["happy", "calm", "nervous", "alive", "sleepy", "hopeful", "curious", "proud"]
QUALITIES = ["story", "secret", "rhythm", "season", "colour", "promise", "silence", "song"]
TIMES = ["morning", "night", "weekend", "summer", "winter", "holiday", "sunday", "evening"]


@dataclass
class SynthCorpora:
    """Text-level synthetic corpora."""

    pairs: list[tuple[str, str]] = field(default_factory=list)
    monologues: list[str] = field(default_factory=list)
    topics: list[str] = field(default_factory=list)
    response_ent4: float | None = None
    mono_ent4: float | None = None

    @property
    def ent4_gap(self) -> float | None:
        """Monologue Ent-4 minus response Ent-4, when both are defined."""
        if self.response_ent4 is None or self.mono_ent4 is None:
            return None
        return self.mono_ent4 - self.response_ent4

    def to_dict(self) -> dict[str, Any]:
        """Convert summary statistics to dictionary."""
        return {
            "num_pairs": len(self.pairs),
            "num_monologues": len(self.monologues),
            "topics": self.topics,
            "response_ent4": self.response_ent4,
            "mono_ent4": self.mono_ent4,
            "ent4_gap": self.ent4_gap,
        }


class SyntheticCorpusGenerator:
    """Draws paired and monologue corpora from fixed grammars.

    Example:
        >>> corpora = SyntheticCorpusGenerator(SynthSpec(), seed=7).generate()
        >>> corpora.ent4_gap >= 1.0
        True
    """

    def __init__(self, spec: SynthSpec, seed: int) -> None:
        """Initialize the generator.

        Args:
            spec: Corpus sizes, topic count, generic share and required gap.
            seed: Seed; equal seeds produce identical corpora.
        """
        if spec.num_topics > len(TOPIC_NOUNS):
            raise ConfigError(f"num_topics must be at most {len(TOPIC_NOUNS)}")
        self.spec = spec
        self._rng = named_rng(seed, "synth")
        self._topics = list(TOPIC_NOUNS)[: spec.num_topics]

    def _pick(self, items: list[str]) -> str:
        return items[int(self._rng.integers(len(items)))]

    def _slots(self, topic: str) -> dict[str, str]:
        nouns = TOPIC_NOUNS[topic]
        first, second = self._rng.choice(len(nouns), size=2, replace=False)
        adj, adj2 = self._rng.choice(len(ADJECTIVES), size=2, replace=False)
        quality, quality2 = self._rng.choice(len(QUALITIES), size=2, replace=False)
        return {
            "n1": nouns[int(first)],
            "n2": nouns[int(second)],
            "adj": ADJECTIVES[int(adj)],
            "adj2": ADJECTIVES[int(adj2)],
            "feel": self._pick(FEELINGS),
            "quality": QUALITIES[int(quality)],
            "quality2": QUALITIES[int(quality2)],
            "time": self._pick(TIMES),
        }

    def _pair(self) -> tuple[str, str]:
        topic = self._pick(self._topics)
        slots = self._slots(topic)
        context = self._pick(CONTEXT_TEMPLATES).format(**slots)
        if self._rng.random() < self.spec.generic_ratio:
            texts = [t for t, _ in GENERIC_RESPONSES]
            probs = np.array([w for _, w in GENERIC_RESPONSES])
            response = texts[int(self._rng.choice(len(texts), p=probs / probs.sum()))]
        else:
            response = self._pick(SPECIFIC_RESPONSES).format(**slots)
        return context, response

    def _monologue(self) -> str:
        topic = self._pick(self._topics)
        return self._pick(MONOLOGUE_TEMPLATES).format(**self._slots(topic))

    def generate(self) -> SynthCorpora:
        """Draw both corpora and verify the diversity gap.

        Raises:
            ConfigError: The measured Ent-4 gap is below ``spec.gap``.
        """
        pairs = [self._pair() for _ in range(self.spec.num_pairs)]
        monologues = [self._monologue() for _ in range(self.spec.num_monologues)]
        corpora = SynthCorpora(pairs=pairs, monologues=monologues, topics=self._topics)
        if pairs and monologues:
            corpora.response_ent4 = ent_n([tokenize(r) for _, r in pairs], 4)
            corpora.mono_ent4 = ent_n([tokenize(m) for m in monologues], 4)
            gap = corpora.ent4_gap
            if gap is not None and gap < self.spec.gap:
                raise ConfigError(
                    f"synthetic Ent-4 gap {gap:.3f} below required {self.spec.gap:.3f}; "
                    "raise generic_ratio or corpus sizes"
                )
        logger.info("synthetic_corpora_generated", **corpora.to_dict())
        return corpora


def synth_generate(spec: SynthSpec, seed: int) -> SynthCorpora:
    """Generate synthetic paired and monologue corpora."""
    return SyntheticCorpusGenerator(spec, seed).generate()
