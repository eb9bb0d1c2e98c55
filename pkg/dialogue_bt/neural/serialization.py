"""Saving and loading models through the checkpoint container."""

from pathlib import Path
from typing import Any, Union

from dialogue_bt.corpus.vocab import SPECIAL_TOKENS
from dialogue_bt.exceptions import RejectedInputError
from dialogue_bt.log import get_logger
from dialogue_bt.models.schemas import ModelConfig
from dialogue_bt.neural.discriminator import Discriminator
from dialogue_bt.neural.language_model import LanguageModel
from dialogue_bt.neural.seq2seq import Seq2SeqPair
from dialogue_bt.numcore.checkpoint import (
    Checkpoint,
    load_checkpoint,
    restore_parameters,
    save_checkpoint,
)
from dialogue_bt.numcore.rng import INIT_STREAM, named_rng

logger = get_logger(__name__)

Model = Union[Seq2SeqPair, LanguageModel, Discriminator]

MODEL_KINDS: dict[str, type] = {
    Seq2SeqPair.kind: Seq2SeqPair,
    LanguageModel.kind: LanguageModel,
    Discriminator.kind: Discriminator,
}


def model_header(model: Model, vocab_hash: str | None = None, **extra: Any) -> dict[str, Any]:
    """Header stored in front of the parameter blob."""
    header: dict[str, Any] = {
        "kind": model.kind,
        "model_config": model.config.model_dump(mode="json"),
        "vocab_hash": vocab_hash,
        "special_tokens": dict(SPECIAL_TOKENS),
    }
    header.update(extra)
    return header


def save_model(
    path: str | Path, model: Model, vocab_hash: str | None = None, **extra: Any
) -> Path:
    """Write ``model`` to ``path``.

    Args:
        path: Target file.
        model: Pair, language model or discriminator.
        vocab_hash: Fingerprint of the vocabulary the model was trained with.
        **extra: Additional JSON-serializable header fields.
    """
    ckpt = Checkpoint.from_parameters(model.parameters(), model_header(model, vocab_hash, **extra))
    target = save_checkpoint(path, ckpt)
    logger.info("checkpoint_saved", path=str(target), kind=model.kind)
    return target


def load_model(path: str | Path, expected_kind: str | None = None) -> tuple[Model, dict[str, Any]]:
    """Rebuild a model from a checkpoint file.

    Returns:
        The model and the checkpoint header.

    Raises:
        RejectedInputError: Unknown kind, or a kind other than ``expected_kind``.
    """
    ckpt = load_checkpoint(path)
    kind = ckpt.header.get("kind")
    if kind not in MODEL_KINDS:
        raise RejectedInputError(f"{path}: unknown model kind {kind!r}")
    if expected_kind is not None and kind != expected_kind:
        raise RejectedInputError(f"{path}: expected a {expected_kind} checkpoint, got {kind}")
    config = ModelConfig(**ckpt.header["model_config"])
    model = MODEL_KINDS[kind](config, named_rng(0, INIT_STREAM))
    restore_parameters(model.parameters(), ckpt)
    return model, ckpt.header
