"""Forward/backward seq2seq pair sharing one encoder.

The forward decoder houses P_f (context -> response) and the backward decoder houses
P_b (response -> context). Decoders are conditioned without attention: the final
encoder state initialises the decoder state and the top-layer encoder summary is
concatenated to every decoder input.
"""

import copy
import hashlib
from collections.abc import Sequence
from typing import Literal

import numpy as np

from dialogue_bt.corpus.batching import pad_sequences, teacher_forcing_arrays
from dialogue_bt.corpus.vocab import BOS_ID
from dialogue_bt.exceptions import RejectedInputError
from dialogue_bt.models.schemas import ModelConfig
from dialogue_bt.neural.layers import DecoderState, Embedding, Linear, LSTMStack, encode_sequences
from dialogue_bt.numcore import tensor as T
from dialogue_bt.numcore.tensor import Parameter, Tensor

Direction = Literal["forward", "backward"]
FORWARD: Direction = "forward"
BACKWARD: Direction = "backward"
DIRECTIONS: tuple[Direction, Direction] = (FORWARD, BACKWARD)


def validate_ids(ids: Sequence[int], vocab_size: int, max_len: int, what: str) -> list[int]:
    """Check a token-id sequence against the model contract.

    Raises:
        RejectedInputError: Empty, too long, or containing an out-of-vocabulary id.
    """
    seq = [int(i) for i in ids]
    if not seq:
        raise RejectedInputError(f"{what} is empty")
    if len(seq) > max_len:
        raise RejectedInputError(f"{what} has {len(seq)} tokens, max_len is {max_len}")
    if min(seq) < 0 or max(seq) >= vocab_size:
        raise RejectedInputError(f"{what} contains an id outside [0, {vocab_size})")
    return seq


class Decoder:
    """LSTM stack plus output projection over the vocabulary."""

    def __init__(self, name: str, config: ModelConfig, rng: np.random.Generator) -> None:
        self.name = name
        self.lstm = LSTMStack(
            f"{name}.lstm",
            config.embed_dim + config.hidden_dim,
            config.hidden_dim,
            config.num_layers,
            rng,
        )
        self.proj = Linear(f"{name}.proj", config.hidden_dim, config.vocab_size, rng)

    def parameters(self) -> list[Parameter]:
        """Trainable parameters."""
        return self.lstm.parameters() + self.proj.parameters()


class Seq2SeqPair:
    """Shared encoder with independent forward and backward decoders.

    Example:
        >>> pair = Seq2SeqPair(ModelConfig(vocab_size=20), named_rng(0, "init"))
        >>> loss = pair.sequence_nll([4, 5, 6], [7, 8], FORWARD)
    """

    kind = "seq2seq_pair"

    def __init__(self, config: ModelConfig, rng: np.random.Generator) -> None:
        """Initialize all parameters.

        Args:
            config: Model dimensions.
            rng: Generator for U(-0.1, 0.1) weight initialisation.
        """
        self.config = config
        self.embedding = Embedding("encoder.embedding", config.vocab_size, config.embed_dim, rng)
        self.encoder = LSTMStack(
            "encoder.lstm", config.embed_dim, config.hidden_dim, config.num_layers, rng
        )
        self.decoders: dict[str, Decoder] = {
            FORWARD: Decoder("decoder_f", config, rng),
            BACKWARD: Decoder("decoder_b", config, rng),
        }

    # ------------------------------------------------------------------
    # parameter partitions

    def encoder_parameters(self) -> list[Parameter]:
        """Shared embedding and encoder LSTM."""
        return self.embedding.parameters() + self.encoder.parameters()

    def decoder_parameters(self, direction: Direction) -> list[Parameter]:
        """Parameters of one decoder only."""
        return self.decoders[direction].parameters()

    def direction_parameters(self, direction: Direction) -> list[Parameter]:
        """Everything a loss in ``direction`` can reach."""
        return self.encoder_parameters() + self.decoder_parameters(direction)

    def parameters(self) -> list[Parameter]:
        """All parameters in checkpoint order."""
        return (
            self.encoder_parameters()
            + self.decoder_parameters(FORWARD)
            + self.decoder_parameters(BACKWARD)
        )

    def decoder_digest(self, direction: Direction) -> str:
        """SHA-256 over the raw bytes of one decoder's values."""
        digest = hashlib.sha256()
        for p in self.decoder_parameters(direction):
            digest.update(p.name.encode("utf-8"))
            digest.update(np.ascontiguousarray(p.value.data).tobytes())
        return digest.hexdigest()

    def snapshot(self) -> "Seq2SeqPair":
        """Deep copy whose values no longer follow training updates."""
        return copy.deepcopy(self)

    # ------------------------------------------------------------------
    # encoding / decoding

    def encode_batch(self, ids: np.ndarray, mask: np.ndarray) -> DecoderState:
        """Encode a padded batch; each row's state is taken at its last real token.

        Args:
            ids: Token ids, shape (batch, time).
            mask: 1.0 for real tokens, 0.0 for padding.
        """
        states = encode_sequences(self.embedding, self.encoder, ids, mask)
        return DecoderState(layers=states, context=states[-1][0])

    def encode(self, src: Sequence[int]) -> DecoderState:
        """Encode one source sequence into a decoder seed state.

        Raises:
            RejectedInputError: Empty, over-long or out-of-vocabulary input.
        """
        seq = validate_ids(src, self.config.vocab_size, self.config.max_len, "source")
        ids, mask = pad_sequences([seq])
        return self.encode_batch(ids, mask)

    def step_logits(
        self, direction: Direction, state: DecoderState, prev_tokens: Sequence[int] | np.ndarray
    ) -> tuple[Tensor, DecoderState]:
        """One decoder step.

        Args:
            direction: Which decoder to run.
            state: Current state, one row per hypothesis.
            prev_tokens: Previously emitted token for each row.

        Returns:
            Logits over the vocabulary (batch, vocab) and the next state.
        """
        decoder = self.decoders[direction]
        x = T.concat([self.embedding(prev_tokens), state.context], axis=-1)  # type: ignore[list-item]
        top, layers = decoder.lstm.step(x, state.layers)
        return decoder.proj(top), DecoderState(layers=layers, context=state.context)

    # ------------------------------------------------------------------
    # losses

    def batch_nll(
        self,
        src: Sequence[Sequence[int]],
        tgt: Sequence[Sequence[int]],
        direction: Direction,
    ) -> tuple[Tensor, int]:
        """Summed teacher-forced NLL over a batch.

        Returns:
            Scalar tensor with the summed loss, and the number of scored target tokens
            (every real token plus one EOS per row).
        """
        vocab, max_len = self.config.vocab_size, self.config.max_len
        src = [validate_ids(s, vocab, max_len, "source") for s in src]
        tgt = [validate_ids(t, vocab, max_len, "target") for t in tgt]
        if len(src) != len(tgt):
            raise RejectedInputError("source and target batches differ in size")
        src_ids, src_mask = pad_sequences(src)
        dec_in, dec_out, weights = teacher_forcing_arrays(tgt)
        state = self.encode_batch(src_ids, src_mask)
        total: Tensor | None = None
        for t in range(dec_in.shape[1]):
            logits, state = self.step_logits(direction, state, dec_in[:, t])
            step_loss = T.softmax_cross_entropy(logits, dec_out[:, t], weights[:, t])
            total = step_loss if total is None else T.add(total, step_loss)
        return total, int(weights.sum())  # type: ignore[return-value]

    def sequence_nll(self, src: Sequence[int], tgt: Sequence[int], direction: Direction) -> Tensor:
        """Mean per-token teacher-forced NLL of ``tgt`` given ``src``.

        ``tgt`` is wrapped with BOS/EOS internally, so ``len(tgt) + 1`` positions are scored.

        Raises:
            RejectedInputError: Empty ``tgt`` or invalid ids.
        """
        total, count = self.batch_nll([src], [tgt], direction)
        return T.scale(total, 1.0 / count)

    def autoencode_nll(self, utterance: Sequence[int]) -> Tensor:
        """Encode ``utterance`` and reconstruct it with the forward decoder."""
        return self.sequence_nll(utterance, utterance, FORWARD)

    def sequence_logprob(
        self,
        src: Sequence[int],
        tokens: Sequence[int],
        direction: Direction,
    ) -> float:
        """Sum of stepwise log-probabilities of ``tokens`` (as emitted, EOS included if present)."""
        state = self.encode(src)
        prev = BOS_ID
        total = 0.0
        for tok in tokens:
            logits, state = self.step_logits(direction, state, [prev])
            total += float(T.log_softmax_array(logits.data)[0, int(tok)])
            prev = int(tok)
        return total
