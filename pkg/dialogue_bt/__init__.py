"""
dialogue-bt - response diversification for LSTM dialogue models

Trains LSTM context-to-response models whose outputs borrow the wording of
unpaired text (comments, idioms, book snippets) through iterative back
translation, and compares them against decoding-time diversity baselines.
"""


from dialogue_bt.models.schemas import RunConfig
from dialogue_bt.neural.seq2seq import Seq2SeqPair
from dialogue_bt.training.back_translation import BtResult, run_bt

__version__ = "0.1.0"
__all__ = ["BtResult", "RunConfig", "Seq2SeqPair", "run_bt", "__version__"]
