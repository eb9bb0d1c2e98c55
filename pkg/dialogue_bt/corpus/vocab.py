"""Token/id vocabulary with reserved special ids."""

import hashlib
from collections import Counter
from collections.abc import Iterable, Sequence
from pathlib import Path

from dialogue_bt.exceptions import CorpusFormatError, RejectedInputError

PAD_ID = 0
BOS_ID = 1
EOS_ID = 2
UNK_ID = 3

PAD = "<pad>"
BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

SPECIAL_TOKENS: dict[str, int] = {PAD: PAD_ID, BOS: BOS_ID, EOS: EOS_ID, UNK: UNK_ID}


class Vocab:
    """Bijective token <-> id map; specials occupy ids 0-3.

    Unknown tokens encode to UNK.
    """

    def __init__(self, tokens: Sequence[str], counts: Sequence[int], min_count: int = 5) -> None:
        """Initialize from ordered regular tokens.

        Args:
            tokens: Regular tokens in id order (ids start at 4).
            counts: Corpus count of each token.
            min_count: Threshold the vocabulary was built with.
        """
        if len(tokens) != len(counts):
            raise ValueError("tokens and counts differ in length")
        self.min_count = min_count
        self._id_to_token: list[str] = list(SPECIAL_TOKENS)
        self._counts: list[int] = [0] * len(SPECIAL_TOKENS)
        for tok, cnt in zip(tokens, counts):
            if tok in SPECIAL_TOKENS:
                raise ValueError(f"regular token collides with special token {tok!r}")
            self._id_to_token.append(tok)
            self._counts.append(int(cnt))
        self._token_to_id = {tok: i for i, tok in enumerate(self._id_to_token)}
        if len(self._token_to_id) != len(self._id_to_token):
            raise ValueError("duplicate token in vocabulary")

    def __len__(self) -> int:
        return len(self._id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self._token_to_id

    def token_id(self, token: str) -> int:
        """Id of ``token``, or UNK."""
        return self._token_to_id.get(token, UNK_ID)

    def token(self, idx: int) -> str:
        """Token for ``idx``."""
        if not 0 <= idx < len(self._id_to_token):
            raise RejectedInputError(f"id {idx} outside vocabulary of {len(self)}")
        return self._id_to_token[idx]

    def count(self, idx: int) -> int:
        """Corpus count recorded for ``idx`` (0 for specials)."""
        return self._counts[idx]

    def encode(self, tokens: Iterable[str]) -> list[int]:
        """Map tokens to ids."""
        return [self.token_id(t) for t in tokens]

    def decode(self, ids: Iterable[int], strip_special: bool = True) -> list[str]:
        """Map ids to tokens, dropping PAD/BOS/EOS by default."""
        skip = {PAD_ID, BOS_ID, EOS_ID} if strip_special else set()
        return [self.token(int(i)) for i in ids if int(i) not in skip]

    def to_tsv(self) -> str:
        """``token<TAB>id<TAB>count`` lines in id order."""
        return "".join(f"{tok}\t{i}\t{self._counts[i]}\n" for i, tok in enumerate(self._id_to_token))

    def fingerprint(self) -> str:
        """SHA-256 of the TSV serialization."""
        return hashlib.sha256(self.to_tsv().encode("utf-8")).hexdigest()

    def save(self, path: str | Path) -> Path:
        """Write the vocabulary file."""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(self.to_tsv(), encoding="utf-8")
        return target

    @classmethod
    def load(cls, path: str | Path) -> "Vocab":
        """Read a vocabulary file written by :meth:`save`.

        Raises:
            CorpusFormatError: Malformed line, misplaced special or non-contiguous id.
        """
        source = str(path)
        tokens: list[str] = []
        counts: list[int] = []
        min_count = None
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        for line_no, line in enumerate(lines, start=1):
            fields = line.split("\t")
            if len(fields) != 3:
                raise CorpusFormatError(source, line_no, "expected token<TAB>id<TAB>count")
            tok, idx_text, count_text = fields
            try:
                idx, cnt = int(idx_text), int(count_text)
            except ValueError as exc:
                raise CorpusFormatError(source, line_no, "id and count must be integers") from exc
            if idx != line_no - 1:
                raise CorpusFormatError(source, line_no, f"expected id {line_no - 1}, got {idx}")
            if idx < len(SPECIAL_TOKENS):
                if SPECIAL_TOKENS.get(tok) != idx:
                    raise CorpusFormatError(source, line_no, f"special id {idx} must be {tok!r}")
                continue
            tokens.append(tok)
            counts.append(cnt)
            min_count = cnt if min_count is None else min(min_count, cnt)
        return cls(tokens, counts, min_count=min_count or 1)


def build_vocab(corpora: Iterable[Iterable[Sequence[str]]], min_count: int = 5) -> Vocab:
    """Count tokens over tokenized corpora and keep those seen ``min_count`` times.

    Ids follow descending frequency; ties are broken by lexicographic token order.

    Args:
        corpora: Each corpus is an iterable of token lists.
        min_count: Minimum occurrences for a token to get its own id.
    """
    counter: Counter[str] = Counter()
    for corpus in corpora:
        for tokens in corpus:
            counter.update(tokens)
    kept = sorted(
        ((tok, cnt) for tok, cnt in counter.items() if cnt >= min_count and tok not in SPECIAL_TOKENS),
        key=lambda item: (-item[1], item[0]),
    )
    return Vocab([t for t, _ in kept], [c for _, c in kept], min_count=min_count)
