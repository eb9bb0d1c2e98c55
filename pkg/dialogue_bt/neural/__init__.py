"""Neural components: seq2seq pair, language model and relevance discriminator."""

from dialogue_bt.neural.discriminator import Discriminator, discriminator_score
from dialogue_bt.neural.language_model import LanguageModel
from dialogue_bt.neural.layers import DecoderState
from dialogue_bt.neural.seq2seq import BACKWARD, DIRECTIONS, FORWARD, Direction, Seq2SeqPair
from dialogue_bt.neural.serialization import load_model, save_model

__all__ = [
    "BACKWARD",
    "DIRECTIONS",
    "DecoderState",
    "Direction",
    "Discriminator",
    "FORWARD",
    "LanguageModel",
    "Seq2SeqPair",
    "discriminator_score",
    "load_model",
    "save_model",
]
