"""Training regimes: initialisation, back translation, multi-task and auxiliary models."""

from dialogue_bt.training.auxiliary import train_discriminator, train_language_model
from dialogue_bt.training.back_translation import (
    BtResult,
    backward_phase,
    forward_phase,
    generate_pseudo_pairs,
    run_bt,
)
from dialogue_bt.training.loop import EarlyStopper, fit
from dialogue_bt.training.trainer import init_train, multitask_train

__all__ = [
    "BtResult",
    "EarlyStopper",
    "backward_phase",
    "fit",
    "forward_phase",
    "generate_pseudo_pairs",
    "init_train",
    "multitask_train",
    "run_bt",
    "train_discriminator",
    "train_language_model",
]
