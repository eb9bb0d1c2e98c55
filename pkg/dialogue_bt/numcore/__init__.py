"""Numerical core: tensors, reverse-mode differentiation, Adam and checkpoints."""

from dialogue_bt.numcore.checkpoint import (
    Checkpoint,
    load_checkpoint,
    restore_parameters,
    save_checkpoint,
)
from dialogue_bt.numcore.optim import Adam, adam_step, clip_global_norm, global_norm
from dialogue_bt.numcore.rng import named_rng
from dialogue_bt.numcore.tensor import Parameter, Tape, Tensor, backward

__all__ = [
    "Adam",
    "Checkpoint",
    "Parameter",
    "Tape",
    "Tensor",
    "adam_step",
    "backward",
    "clip_global_norm",
    "global_norm",
    "load_checkpoint",
    "named_rng",
    "restore_parameters",
    "save_checkpoint",
]
