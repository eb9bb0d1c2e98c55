"""Run directory layout, config snapshots and the output-directory lock."""

import json
import os
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from dialogue_bt.corpus.datasets import MonoCorpus, PairedCorpus, Split
from dialogue_bt.corpus.text import read_mono, read_paired_tsv, write_mono, write_paired_tsv
from dialogue_bt.corpus.vocab import Vocab
from dialogue_bt.exceptions import RejectedInputError, WorkspaceLockedError
from dialogue_bt.log import get_logger
from dialogue_bt.models.schemas import RunConfig

logger = get_logger(__name__)

LOCK_NAME = ".lock"
CONFIG_NAME = "config.json"

STAGES = (
    "synth",
    "data",
    "init",
    "lm",
    "disc",
    "bt",
    "multitask",
    "decode",
    "retrieve",
    "eval",
    "gradcheck",
)

TokenPair = tuple[list[str], list[str]]


def write_json(path: str | Path, data: Any) -> Path:
    """Pretty JSON with sorted keys and a trailing newline."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return target


def write_token_pairs(path: str | Path, pairs: Sequence[TokenPair]) -> Path:
    """Tokenized pairs, tokens joined by single spaces."""
    return write_paired_tsv(path, [(" ".join(c), " ".join(r)) for c, r in pairs])


def read_token_pairs(path: str | Path) -> list[TokenPair]:
    """Inverse of :func:`write_token_pairs`."""
    return [(c.split(" "), r.split(" ")) for c, r in read_paired_tsv(path)]


def write_token_lines(path: str | Path, utterances: Sequence[Sequence[str]]) -> Path:
    """Tokenized utterances, one per line."""
    return write_mono(path, [" ".join(u) for u in utterances])


def read_token_lines(path: str | Path) -> list[list[str]]:
    """Inverse of :func:`write_token_lines`."""
    return [u.split(" ") for u in read_mono(path)]


@dataclass
class PreparedData:
    """The ``data/`` stage read back and mapped to ids."""

    vocab: Vocab
    train: PairedCorpus
    valid: PairedCorpus
    test: PairedCorpus
    mono: MonoCorpus
    valid_mono: MonoCorpus
    train_tokens: list[TokenPair]
    valid_tokens: list[TokenPair]
    test_tokens: list[TokenPair]
    mono_tokens: list[list[str]]


class Workspace:
    """One ``--out`` directory holding every stage's artifacts.

    Example:
        >>> ws = Workspace("runs/demo")
        >>> with ws.lock():
        ...     ws.snapshot_config("init", config)
    """

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)

    def stage(self, name: str) -> Path:
        """Create and return ``root/name``."""
        if name not in STAGES:
            raise RejectedInputError(f"unknown workspace stage {name!r}")
        path = self.root / name
        path.mkdir(parents=True, exist_ok=True)
        return path

    def path(self, *parts: str) -> Path:
        """A path under the root, without creating anything."""
        return self.root.joinpath(*parts)

    def require(self, *parts: str, hint: str = "") -> Path:
        """An existing artifact.

        Raises:
            RejectedInputError: The artifact is missing.
        """
        path = self.path(*parts)
        if not path.exists():
            suffix = f"; run `{hint}` first" if hint else ""
            raise RejectedInputError(f"missing artifact {path}{suffix}")
        return path

    def snapshot_config(self, stage: str, config: RunConfig) -> Path:
        """Write the resolved config into a stage directory."""
        target = self.stage(stage) / CONFIG_NAME
        target.write_text(config.canonical_json() + "\n", encoding="utf-8")
        return target

    @contextmanager
    def lock(self) -> Iterator[Path]:
        """Hold ``root/.lock`` for the duration of a command.

        Raises:
            WorkspaceLockedError: The lock file already exists.
        """
        self.root.mkdir(parents=True, exist_ok=True)
        lock_path = self.root / LOCK_NAME
        try:
            fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError as exc:
            raise WorkspaceLockedError(f"{self.root} is locked by another command ({lock_path})") from exc
        try:
            os.write(fd, f"{os.getpid()}\n".encode("ascii"))
        finally:
            os.close(fd)
        try:
            yield lock_path
        finally:
            lock_path.unlink(missing_ok=True)

    # ------------------------------------------------------------------
    # data/ stage
    # ------------------------------------------------------------------

    def _paired(self, vocab: Vocab, split: Split, pairs: list[TokenPair]) -> PairedCorpus:
        return PairedCorpus([(vocab.encode(c), vocab.encode(r)) for c, r in pairs], split=split)

    def load_prepared(self) -> PreparedData:
        """Read ``data/`` written by ``prepare``.

        Raises:
            RejectedInputError: ``prepare`` has not run.
        """
        vocab = Vocab.load(self.require("data", "vocab.tsv", hint="prepare"))
        train_tokens = read_token_pairs(self.require("data", "train.tsv", hint="prepare"))
        valid_tokens = self._optional_pairs("valid.tsv")
        test_tokens = self._optional_pairs("test.tsv")
        mono_tokens = read_token_lines(self.require("data", "mono.txt", hint="prepare"))
        valid_mono_path = self.path("data", "mono_valid.txt")
        valid_mono_tokens = (
            read_token_lines(valid_mono_path)
            if valid_mono_path.exists() and valid_mono_path.stat().st_size
            else []
        )
        return PreparedData(
            vocab=vocab,
            train=self._paired(vocab, "train", train_tokens),
            valid=self._paired(vocab, "valid", valid_tokens),
            test=self._paired(vocab, "test", test_tokens),
            mono=MonoCorpus([vocab.encode(u) for u in mono_tokens]),
            valid_mono=MonoCorpus([vocab.encode(u) for u in valid_mono_tokens]),
            train_tokens=train_tokens,
            valid_tokens=valid_tokens,
            test_tokens=test_tokens,
            mono_tokens=mono_tokens,
        )

    def _optional_pairs(self, name: str) -> list[TokenPair]:
        path = self.path("data", name)
        if not path.exists() or not path.stat().st_size:
            return []
        return read_token_pairs(path)
