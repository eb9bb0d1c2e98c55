"""Named random streams derived from one run seed."""

import zlib

import numpy as np

INIT_STREAM = "init"
SHUFFLE_STREAM = "data-shuffle"
DECODE_STREAM = "decode-sample"


def named_rng(seed: int, stream: str) -> np.random.Generator:
    """Independent generator for ``stream`` under ``seed``.

    The same (seed, stream) always yields the same sequence, so components can be rerun
    on their own without replaying the draws of the others.
    """
    return np.random.default_rng([int(seed), zlib.crc32(stream.encode("utf-8"))])
