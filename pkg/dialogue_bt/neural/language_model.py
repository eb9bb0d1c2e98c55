"""Unconditional LSTM language model over the monologue corpus."""

from collections.abc import Sequence

import numpy as np

from dialogue_bt.corpus.batching import teacher_forcing_arrays
from dialogue_bt.corpus.vocab import BOS_ID
from dialogue_bt.models.schemas import ModelConfig
from dialogue_bt.neural.layers import DecoderState, Embedding, Linear, LSTMStack
from dialogue_bt.neural.seq2seq import validate_ids
from dialogue_bt.numcore import tensor as T
from dialogue_bt.numcore.tensor import Parameter, Tensor


class LanguageModel:
    """Embedding, LSTM stack and vocabulary projection.

    Example:
        >>> lm = LanguageModel(ModelConfig(vocab_size=20), named_rng(0, "init"))
        >>> lm.lm_nll([4, 5, 6]).item() > 0
        True
    """

    kind = "language_model"

    def __init__(self, config: ModelConfig, rng: np.random.Generator) -> None:
        self.config = config
        self.embedding = Embedding("lm.embedding", config.vocab_size, config.embed_dim, rng)
        self.lstm = LSTMStack("lm.lstm", config.embed_dim, config.hidden_dim, config.num_layers, rng)
        self.proj = Linear("lm.proj", config.hidden_dim, config.vocab_size, rng)

    def parameters(self) -> list[Parameter]:
        """All parameters in checkpoint order."""
        return self.embedding.parameters() + self.lstm.parameters() + self.proj.parameters()

    def initial_state(self, batch: int = 1) -> DecoderState:
        """Zero state with no conditioning context."""
        return DecoderState(layers=self.lstm.zero_state(batch))

    def step_logits(
        self, state: DecoderState, prev_tokens: Sequence[int] | np.ndarray
    ) -> tuple[Tensor, DecoderState]:
        """One step: logits over the vocabulary and the next state."""
        top, layers = self.lstm.step(self.embedding(prev_tokens), state.layers)
        return self.proj(top), DecoderState(layers=layers)

    def batch_nll(self, utterances: Sequence[Sequence[int]]) -> tuple[Tensor, int]:
        """Summed teacher-forced NLL and the number of scored tokens (EOS included)."""
        seqs = [
            validate_ids(u, self.config.vocab_size, self.config.max_len, "utterance")
            for u in utterances
        ]
        dec_in, dec_out, weights = teacher_forcing_arrays(seqs)
        state = self.initial_state(len(seqs))
        total: Tensor | None = None
        for t in range(dec_in.shape[1]):
            logits, state = self.step_logits(state, dec_in[:, t])
            step_loss = T.softmax_cross_entropy(logits, dec_out[:, t], weights[:, t])
            total = step_loss if total is None else T.add(total, step_loss)
        return total, int(weights.sum())  # type: ignore[return-value]

    def lm_nll(self, utterance: Sequence[int]) -> Tensor:
        """Mean per-token NLL of one utterance, ``len(utterance) + 1`` positions."""
        total, count = self.batch_nll([utterance])
        return T.scale(total, 1.0 / count)

    def sequence_logprob(self, tokens: Sequence[int]) -> float:
        """Sum of stepwise log-probabilities of ``tokens`` as emitted."""
        state = self.initial_state()
        prev = BOS_ID
        total = 0.0
        for tok in tokens:
            logits, state = self.step_logits(state, [prev])
            total += float(T.log_softmax_array(logits.data)[0, int(tok)])
            prev = int(tok)
        return total
