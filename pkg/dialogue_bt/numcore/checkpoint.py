"""Checkpoint container: JSON manifest followed by a float32 blob.

Layout::

    MAGIC (8 bytes) | manifest length (uint64, little-endian) | manifest (UTF-8 JSON) | blob

The blob holds every parameter as little-endian float32, in manifest order.
"""

import json
import struct
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from dialogue_bt.exceptions import RejectedInputError
from dialogue_bt.numcore.tensor import Parameter

MAGIC = b"DBTCKPT1"
FORMAT_VERSION = 1
_DTYPE = "<f4"


@dataclass
class Checkpoint:
    """In-memory checkpoint contents."""

    header: dict[str, Any] = field(default_factory=dict)
    arrays: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def from_parameters(cls, params: Iterable[Parameter], header: dict[str, Any]) -> "Checkpoint":
        """Snapshot parameter values (copied) under their names."""
        return cls(header=dict(header), arrays={p.name: p.value.data.copy() for p in params})


def encode_checkpoint(ckpt: Checkpoint) -> bytes:
    """Serialize a checkpoint to bytes."""
    entries = []
    blobs = []
    offset = 0
    for name, arr in ckpt.arrays.items():
        raw = np.ascontiguousarray(arr, dtype=np.float64).astype(_DTYPE).tobytes()
        entries.append(
            {
                "name": name,
                "shape": list(arr.shape),
                "dtype": "float32",
                "offset": offset,
                "nbytes": len(raw),
            }
        )
        blobs.append(raw)
        offset += len(raw)
    manifest = {
        "format": "dialogue-bt-checkpoint",
        "version": FORMAT_VERSION,
        "header": ckpt.header,
        "params": entries,
    }
    manifest_bytes = json.dumps(manifest, ensure_ascii=False, separators=(",", ":")).encode("utf-8")
    return MAGIC + struct.pack("<Q", len(manifest_bytes)) + manifest_bytes + b"".join(blobs)


def decode_checkpoint(data: bytes, source: str = "<bytes>") -> Checkpoint:
    """Parse bytes produced by :func:`encode_checkpoint`."""
    if not data.startswith(MAGIC) or len(data) < len(MAGIC) + 8:
        raise RejectedInputError(f"{source}: not a dialogue-bt checkpoint")
    (length,) = struct.unpack("<Q", data[len(MAGIC) : len(MAGIC) + 8])
    start = len(MAGIC) + 8
    try:
        manifest = json.loads(data[start : start + length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise RejectedInputError(f"{source}: corrupt manifest") from exc
    if manifest.get("version") != FORMAT_VERSION:
        raise RejectedInputError(f"{source}: unsupported version {manifest.get('version')}")
    blob = memoryview(data)[start + length :]
    arrays: dict[str, np.ndarray] = {}
    for entry in manifest["params"]:
        lo, hi = entry["offset"], entry["offset"] + entry["nbytes"]
        if hi > len(blob):
            raise RejectedInputError(f"{source}: blob truncated at {entry['name']}")
        values = np.frombuffer(blob[lo:hi], dtype=_DTYPE).astype(np.float64)
        arrays[entry["name"]] = values.reshape(entry["shape"])
    return Checkpoint(header=manifest.get("header", {}), arrays=arrays)


def save_checkpoint(path: str | Path, ckpt: Checkpoint) -> Path:
    """Write a checkpoint file, creating parent directories."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(encode_checkpoint(ckpt))
    return target


def load_checkpoint(path: str | Path) -> Checkpoint:
    """Read a checkpoint file."""
    target = Path(path)
    return decode_checkpoint(target.read_bytes(), source=str(target))


def restore_parameters(params: Iterable[Parameter], ckpt: Checkpoint) -> None:
    """Copy checkpoint arrays into matching parameters.

    Raises:
        RejectedInputError: A parameter is missing or has a different shape.
    """
    for p in params:
        if p.name not in ckpt.arrays:
            raise RejectedInputError(f"checkpoint has no parameter {p.name!r}")
        arr = ckpt.arrays[p.name]
        if tuple(arr.shape) != p.shape:
            raise RejectedInputError(f"{p.name}: checkpoint shape {arr.shape} != {p.shape}")
        p.assign(arr)
