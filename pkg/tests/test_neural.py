"""Tests for the seq2seq pair, language model, discriminator and model files."""

import numpy as np
import pytest

from dialogue_bt.corpus.vocab import EOS_ID
from dialogue_bt.exceptions import RejectedInputError
from dialogue_bt.neural import (
    BACKWARD,
    FORWARD,
    Discriminator,
    LanguageModel,
    Seq2SeqPair,
    load_model,
    save_model,
)
from dialogue_bt.neural.gradcheck import run_gradient_suite
from dialogue_bt.numcore import tensor as T
from dialogue_bt.numcore.rng import named_rng
from dialogue_bt.numcore.tensor import Tape


class TestSeq2SeqPair:
    """Test suite for the shared-encoder pair."""

    def test_parameter_partitions_are_disjoint(self, tiny_pair):
        """Test that the two decoders share no parameters and both use the encoder."""
        fwd = {p.name for p in tiny_pair.decoder_parameters(FORWARD)}
        bwd = {p.name for p in tiny_pair.decoder_parameters(BACKWARD)}
        enc = {p.name for p in tiny_pair.encoder_parameters()}
        assert not fwd & bwd
        assert enc <= {p.name for p in tiny_pair.direction_parameters(BACKWARD)}
        assert len(tiny_pair.parameters()) == len(enc) + len(fwd) + len(bwd)

    def test_initial_weights_are_small(self, tiny_pair):
        """Test the U(-0.1, 0.1) initialisation of weight matrices."""
        for p in tiny_pair.parameters():
            assert np.abs(p.value.data).max() <= 1.0

    def test_sequence_nll_matches_logprob(self, tiny_pair):
        """Test that mean NLL times positions equals the negative sequence log-probability."""
        src, tgt = [4, 5, 6], [7, 8]
        nll = tiny_pair.sequence_nll(src, tgt, FORWARD).item()
        logprob = tiny_pair.sequence_logprob(src, tgt + [EOS_ID], FORWARD)
        assert nll * 3 == pytest.approx(-logprob)

    def test_batch_padding_does_not_change_loss(self, tiny_pair):
        """Test that a row's loss is unaffected by longer rows in the batch."""
        alone, count = tiny_pair.batch_nll([[4, 5]], [[6]], FORWARD)
        padded, _ = tiny_pair.batch_nll([[4, 5], [4, 5, 6, 7, 8]], [[6], [9, 9, 9]], FORWARD)
        first_only = padded.item() - tiny_pair.batch_nll([[4, 5, 6, 7, 8]], [[9, 9, 9]], FORWARD)[0].item()
        assert count == 2
        assert first_only == pytest.approx(alone.item())

    def test_rejects_empty_and_long_input(self, tiny_pair):
        """Test input validation at the model boundary."""
        with pytest.raises(RejectedInputError):
            tiny_pair.encode([])
        with pytest.raises(RejectedInputError):
            tiny_pair.encode([4] * 9)
        with pytest.raises(RejectedInputError):
            tiny_pair.encode([12])

    def test_backward_loss_leaves_forward_decoder_gradient_zero(self, tiny_pair):
        """Test that a backward-direction loss never reaches the forward decoder."""
        with Tape() as tape:
            loss, _ = tiny_pair.batch_nll([[4, 5]], [[6, 7]], BACKWARD)
        T.backward(tape, loss)
        assert all(not p.grad.any() for p in tiny_pair.decoder_parameters(FORWARD))
        assert any(p.grad.any() for p in tiny_pair.decoder_parameters(BACKWARD))

    def test_snapshot_is_independent(self, tiny_pair):
        """Test that a snapshot does not follow later updates."""
        frozen = tiny_pair.snapshot()
        digest = frozen.decoder_digest(BACKWARD)
        tiny_pair.decoder_parameters(BACKWARD)[0].value.data += 1.0
        assert frozen.decoder_digest(BACKWARD) == digest
        assert tiny_pair.decoder_digest(BACKWARD) != digest


class TestLanguageModelAndDiscriminator:
    """Test suite for the auxiliary models."""

    def test_lm_nll_matches_sequence_logprob(self, tiny_model_config):
        """Test the LM's mean NLL against its step log-probabilities."""
        lm = LanguageModel(tiny_model_config, named_rng(0, "init"))
        nll = lm.lm_nll([4, 5]).item()
        assert nll * 3 == pytest.approx(-lm.sequence_logprob([4, 5, EOS_ID]))

    def test_discriminator_scores_are_probabilities(self, tiny_model_config):
        """Test that relevance scores lie strictly inside (0, 1)."""
        disc = Discriminator(tiny_model_config, named_rng(0, "init"))
        scores = disc.score_batch([[4, 5], [6]], [[7], [8, 9, 10]])
        assert scores.shape == (2,)
        assert ((scores > 0) & (scores < 1)).all()

    def test_discriminator_rejects_mismatched_batch(self, tiny_model_config):
        """Test that contexts and responses must pair up."""
        disc = Discriminator(tiny_model_config, named_rng(0, "init"))
        with pytest.raises(RejectedInputError):
            disc.score_batch([[4]], [[5], [6]])


class TestSerialization:
    """Test suite for model files."""

    def test_pair_reloads_with_same_outputs(self, tiny_pair, tmp_path):
        """Test that a reloaded pair scores sequences like the original at float32 precision."""
        path = save_model(tmp_path / "pair.ckpt", tiny_pair, vocab_hash="abc")
        model, header = load_model(path, expected_kind="seq2seq_pair")
        assert header["vocab_hash"] == "abc"
        assert header["special_tokens"]["</s>"] == EOS_ID
        original = tiny_pair.sequence_logprob([4, 5], [6, EOS_ID], FORWARD)
        assert model.sequence_logprob([4, 5], [6, EOS_ID], FORWARD) == pytest.approx(original, abs=1e-5)

    def test_kind_mismatch(self, tiny_model_config, tmp_path):
        """Test that loading a model of another kind is rejected."""
        lm = LanguageModel(tiny_model_config, named_rng(0, "init"))
        path = save_model(tmp_path / "lm.ckpt", lm)
        with pytest.raises(RejectedInputError):
            load_model(path, expected_kind="seq2seq_pair")

    def test_reload_is_deterministic(self, tiny_model_config, tmp_path):
        """Test that saving the same seed twice gives identical bytes."""
        a = save_model(tmp_path / "a.ckpt", Seq2SeqPair(tiny_model_config, named_rng(4, "init")))
        b = save_model(tmp_path / "b.ckpt", Seq2SeqPair(tiny_model_config, named_rng(4, "init")))
        assert a.read_bytes() == b.read_bytes()


class TestGradientSuite:
    """Test suite for composed-model gradient checks."""

    def test_suite_passes_for_one_seed(self):
        """Test primitives and all three models for a single seed."""
        results = run_gradient_suite([0])
        names = {r.name for r in results}
        assert {"seq2seq_pair", "language_model", "discriminator"} <= names
        assert all(r.passed for r in results), [r.to_dict() for r in results if not r.passed]

    @pytest.mark.slow
    def test_suite_passes_for_ten_seeds(self):
        """Test the full gradient suite across ten seeds."""
        results = run_gradient_suite(range(10))
        assert all(r.passed for r in results)
