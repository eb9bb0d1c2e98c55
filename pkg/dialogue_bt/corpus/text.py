"""Tokenization and corpus file readers/writers."""

from collections.abc import Iterable, Sequence
from pathlib import Path

from dialogue_bt.exceptions import CorpusFormatError, RejectedInputError

# CJK Unified Ideographs and Extension A
_CJK_RANGES = ((0x4E00, 0x9FFF), (0x3400, 0x4DBF))


def is_cjk(char: str) -> bool:
    """Whether a single character is a CJK ideograph."""
    code = ord(char)
    return any(lo <= code <= hi for lo, hi in _CJK_RANGES)


def tokenize(text: str | bytes) -> list[str]:
    """Split text into tokens.

    CJK ideographs become single-character tokens; everything else is split on
    whitespace, and empty tokens are dropped.

    Raises:
        RejectedInputError: ``text`` is not valid UTF-8.

    Example:
        >>> tokenize("hello 世界")
        ['hello', '世', '界']
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise RejectedInputError(f"invalid UTF-8 input: {exc}") from exc
    try:
        text.encode("utf-8")
    except UnicodeEncodeError as exc:
        raise RejectedInputError(f"text is not encodable as UTF-8: {exc}") from exc

    tokens: list[str] = []
    run: list[str] = []
    for char in text:
        if is_cjk(char):
            if run:
                tokens.extend("".join(run).split())
                run = []
            tokens.append(char)
        else:
            run.append(char)
    if run:
        tokens.extend("".join(run).split())
    return tokens


def detokenize(tokens: Sequence[str]) -> str:
    """Join tokens with spaces, except between two CJK characters."""
    out: list[str] = []
    prev_cjk = False
    for tok in tokens:
        cur_cjk = len(tok) == 1 and is_cjk(tok)
        if out and not (prev_cjk and cur_cjk):
            out.append(" ")
        out.append(tok)
        prev_cjk = cur_cjk
    return "".join(out)


def _read_lines(path: str | Path) -> list[str]:
    source = str(path)
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        line_no = raw[: exc.start].count(b"\n") + 1
        raise CorpusFormatError(source, line_no, "invalid UTF-8") from exc
    return text.splitlines()


def read_paired_tsv(path: str | Path, allow_score: bool = False) -> list[tuple[str, str]]:
    """Read ``context<TAB>response`` lines.

    Args:
        path: File to read.
        allow_score: Also accept a third ``logprob`` column (decode output).

    Raises:
        CorpusFormatError: Wrong column count or an empty side, with its line number.
    """
    pairs = []
    for line_no, line in enumerate(_read_lines(path), start=1):
        fields = line.split("\t")
        if len(fields) == 3 and allow_score:
            fields = fields[:2]
        if len(fields) != 2:
            raise CorpusFormatError(str(path), line_no, "expected context<TAB>response")
        context, response = fields
        if not context.strip() or not response.strip():
            raise CorpusFormatError(str(path), line_no, "empty context or response")
        pairs.append((context, response))
    return pairs


def read_mono(path: str | Path) -> list[str]:
    """Read one utterance per line.

    Raises:
        CorpusFormatError: Blank line or embedded tab.
    """
    utterances = []
    for line_no, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            raise CorpusFormatError(str(path), line_no, "blank utterance")
        if "\t" in line:
            raise CorpusFormatError(str(path), line_no, "tab inside a monologue utterance")
        utterances.append(line)
    return utterances


def read_blocklist(path: str | Path) -> list[str]:
    """Read one blocked phrase per line.

    Raises:
        CorpusFormatError: Blank phrase.
    """
    phrases = []
    for line_no, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            raise CorpusFormatError(str(path), line_no, "blank phrase")
        phrases.append(line.strip())
    return phrases


def write_paired_tsv(path: str | Path, pairs: Iterable[tuple[str, str]]) -> Path:
    """Write ``context<TAB>response`` lines."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text("".join(f"{c}\t{r}\n" for c, r in pairs), encoding="utf-8")
    return target


def write_mono(path: str | Path, utterances: Iterable[str]) -> Path:
    """Write one utterance per line."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text("".join(f"{u}\n" for u in utterances), encoding="utf-8")
    return target
