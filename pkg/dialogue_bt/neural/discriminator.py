"""Context/response relevance classifier used for the adversarial score."""

from collections.abc import Sequence

import numpy as np

from dialogue_bt.corpus.batching import pad_sequences
from dialogue_bt.exceptions import RejectedInputError
from dialogue_bt.models.schemas import ModelConfig
from dialogue_bt.neural.layers import Embedding, Linear, LSTMStack, encode_sequences
from dialogue_bt.neural.seq2seq import validate_ids
from dialogue_bt.numcore import tensor as T
from dialogue_bt.numcore.tensor import Parameter, Tensor


class _SideEncoder:
    def __init__(self, name: str, config: ModelConfig, rng: np.random.Generator) -> None:
        self.embedding = Embedding(f"{name}.embedding", config.vocab_size, config.embed_dim, rng)
        self.lstm = LSTMStack(
            f"{name}.lstm", config.embed_dim, config.hidden_dim, config.num_layers, rng
        )

    def __call__(self, seqs: Sequence[Sequence[int]]) -> Tensor:
        ids, mask = pad_sequences(seqs)
        return encode_sequences(self.embedding, self.lstm, ids, mask)[-1][0]

    def parameters(self) -> list[Parameter]:
        return self.embedding.parameters() + self.lstm.parameters()


class Discriminator:
    """Two independent LSTM encoders and a linear head over ``[c, r, c * r]``.

    The head emits one logit; ``sigmoid(logit)`` is the probability that the response
    is a genuine reply to the context.
    """

    kind = "discriminator"

    def __init__(self, config: ModelConfig, rng: np.random.Generator) -> None:
        self.config = config
        self.context_encoder = _SideEncoder("disc.context", config, rng)
        self.response_encoder = _SideEncoder("disc.response", config, rng)
        self.head = Linear("disc.head", 3 * config.hidden_dim, 1, rng)

    def parameters(self) -> list[Parameter]:
        """All parameters in checkpoint order."""
        return (
            self.context_encoder.parameters()
            + self.response_encoder.parameters()
            + self.head.parameters()
        )

    def logits(
        self, contexts: Sequence[Sequence[int]], responses: Sequence[Sequence[int]]
    ) -> Tensor:
        """Relevance logits, shape (batch, 1).

        Raises:
            RejectedInputError: Mismatched batch sizes, empty or out-of-vocabulary input.
        """
        if len(contexts) != len(responses) or not contexts:
            raise RejectedInputError("contexts and responses must be equal-length and non-empty")
        vocab, max_len = self.config.vocab_size, self.config.max_len
        ctx = [validate_ids(c, vocab, max_len, "context") for c in contexts]
        resp = [validate_ids(r, vocab, max_len, "response") for r in responses]
        c = self.context_encoder(ctx)
        r = self.response_encoder(resp)
        return self.head(T.concat([c, r, T.mul(c, r)], axis=-1))

    def batch_loss(
        self,
        contexts: Sequence[Sequence[int]],
        responses: Sequence[Sequence[int]],
        labels: Sequence[int],
    ) -> Tensor:
        """Summed binary cross-entropy, as a two-way softmax over ``[0, logit]``."""
        logit = self.logits(contexts, responses)
        zeros = T.constant(np.zeros(logit.shape))
        return T.softmax_cross_entropy(T.concat([zeros, logit], axis=-1), labels)

    def score_batch(
        self, contexts: Sequence[Sequence[int]], responses: Sequence[Sequence[int]]
    ) -> np.ndarray:
        """Relevance probabilities in (0, 1), one per pair."""
        return T.sigmoid(self.logits(contexts, responses)).data.reshape(-1)

    def score(self, context: Sequence[int], response: Sequence[int]) -> float:
        """Probability that ``response`` genuinely answers ``context``."""
        return float(self.score_batch([context], [response])[0])


def discriminator_score(disc: Discriminator, context: Sequence[int], response: Sequence[int]) -> float:
    """Sigmoid of the head logit for one pair."""
    return disc.score(context, response)
