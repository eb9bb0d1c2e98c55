"""Corpus ingestion, filtering, vocabulary and batching.

``corpus.synthetic`` and ``corpus.retrieval`` are imported from their modules directly.
"""

from dialogue_bt.corpus.vocab import (
    BOS_ID,
    EOS_ID,
    PAD_ID,
    SPECIAL_TOKENS,
    UNK_ID,
    Vocab,
    build_vocab,
)
from dialogue_bt.corpus.batching import Batch, BatchStream, pad_sequences, truncate, truncate_and_batch
from dialogue_bt.corpus.datasets import MonoCorpus, PairedCorpus
from dialogue_bt.corpus.filtering import FilterResult, UtteranceFilter, filter_corpus
from dialogue_bt.corpus.text import detokenize, read_blocklist, read_mono, read_paired_tsv, tokenize

__all__ = [
    "BOS_ID",
    "Batch",
    "BatchStream",
    "EOS_ID",
    "FilterResult",
    "MonoCorpus",
    "PAD_ID",
    "PairedCorpus",
    "SPECIAL_TOKENS",
    "UNK_ID",
    "UtteranceFilter",
    "Vocab",
    "build_vocab",
    "detokenize",
    "filter_corpus",
    "pad_sequences",
    "read_blocklist",
    "read_mono",
    "read_paired_tsv",
    "tokenize",
    "truncate",
    "truncate_and_batch",
]
