"""Tests for the optimisation loop, initialisation, back translation and auxiliary models."""

import numpy as np
import pytest

from dialogue_bt.corpus.datasets import MonoCorpus, PairedCorpus
from dialogue_bt.corpus.synthetic import synth_generate
from dialogue_bt.corpus.text import tokenize
from dialogue_bt.corpus.vocab import EOS_ID, UNK_ID, build_vocab
from dialogue_bt.decoding import Seq2SeqScorer, greedy_decode, nucleus_sample
from dialogue_bt.evaluation import dist_n, ent_n, novelty_rates
from dialogue_bt.evaluation.model_metrics import perplexity
from dialogue_bt.exceptions import (
    ConfigError,
    FrozenParameterError,
    RejectedInputError,
    UndefinedMetricError,
)
from dialogue_bt.models.results import Hypothesis, PhaseResult
from dialogue_bt.models.schemas import BtConfig, ModelConfig, OptimConfig, SynthSpec
from dialogue_bt.neural.discriminator import Discriminator
from dialogue_bt.neural.language_model import LanguageModel
from dialogue_bt.neural.seq2seq import BACKWARD, FORWARD, Seq2SeqPair
from dialogue_bt.numcore import tensor as T
from dialogue_bt.numcore.rng import INIT_STREAM, named_rng
from dialogue_bt.numcore.tensor import Parameter
from dialogue_bt.training import (
    EarlyStopper,
    backward_phase,
    fit,
    forward_phase,
    generate_pseudo_pairs,
    init_train,
    multitask_train,
    run_bt,
    train_discriminator,
    train_language_model,
)
from dialogue_bt.training import back_translation
from dialogue_bt.training.auxiliary import with_negatives
from dialogue_bt.training.trainer import batch_mean_nll, train_direction


def quadratic(p: Parameter):
    """Loss ``sum(p ** 2)`` as a step function."""
    return lambda: T.tensor_sum(T.mul(p.value, p.value))


class TestEarlyStopper:
    """Test suite for relative-improvement early stopping."""

    def test_small_improvement_counts_as_bad(self):
        """Test that a gain below epsilon does not reset patience."""
        stopper = EarlyStopper(epsilon=1e-3, patience=2)
        assert not stopper.update(10.0)
        assert not stopper.update(9.995)
        assert stopper.update(9.994)
        assert stopper.best == 10.0

    def test_real_improvement_resets(self):
        """Test that a sufficient gain resets the bad-evaluation count."""
        stopper = EarlyStopper(epsilon=1e-3, patience=2)
        stopper.update(10.0)
        stopper.update(10.0)
        assert not stopper.update(5.0)
        assert stopper.bad_evaluations == 0


class TestFit:
    """Test suite for the generic training loop."""

    def test_zero_steps_changes_nothing(self):
        """Test that a zero step budget runs no update and no validation."""
        p = Parameter("p", np.array([1.0, 2.0]))
        calls = []
        result = fit(
            "noop",
            [p],
            quadratic(p),
            lambda: calls.append(1) or 0.0,
            OptimConfig(),
            BtConfig(max_steps_per_phase=0),
        )
        assert result.steps == 0
        assert result.validation_history == []
        assert calls == []
        np.testing.assert_array_equal(p.value.data, [1.0, 2.0])

    def test_validates_every_k_steps_and_at_end(self):
        """Test the validation schedule."""
        p = Parameter("p", np.array([1.0]))
        values = iter([5.0, 4.0, 3.0])
        result = fit(
            "sched",
            [p],
            quadratic(p),
            lambda: next(values),
            OptimConfig(learning_rate=0.1),
            BtConfig(max_steps_per_phase=5, eval_every=2, patience=3),
        )
        assert result.steps == 5
        assert result.validation_history == [5.0, 4.0, 3.0]
        assert result.best_validation_loss == 3.0
        assert abs(p.value.data[0]) < 1.0

    def test_stops_after_patience(self):
        """Test early stopping on a flat validation loss."""
        p = Parameter("p", np.array([1.0]))
        result = fit(
            "flat",
            [p],
            quadratic(p),
            lambda: 1.0,
            OptimConfig(),
            BtConfig(max_steps_per_phase=10, eval_every=1, patience=2),
        )
        assert result.steps == 3
        assert result.stopped_early

    def test_adam_state_reset_per_phase(self):
        """Test that moments from an earlier phase do not carry over."""
        p = Parameter("p", np.array([1.0]))
        p.adam_m[...] = 100.0
        p.step_count = 50
        fit("fresh", [p], quadratic(p), lambda: 1.0, OptimConfig(), BtConfig(max_steps_per_phase=1))
        assert p.step_count == 1
        assert abs(p.adam_m[0]) < 100.0


class TestInitAndDirections:
    """Test suite for initialisation and single-direction training."""

    def test_init_updates_both_decoders(self, tiny_pair, tiny_paired, optim_config, fast_trainer):
        """Test that joint initialisation trains both directions."""
        fwd = tiny_pair.decoder_digest(FORWARD)
        bwd = tiny_pair.decoder_digest(BACKWARD)
        result = init_train(tiny_pair, tiny_paired, optim_config, fast_trainer, tiny_paired)
        assert result.steps == 3
        assert len(result.validation_history) == 2
        assert tiny_pair.decoder_digest(FORWARD) != fwd
        assert tiny_pair.decoder_digest(BACKWARD) != bwd

    def test_init_rejects_empty_corpus(self, tiny_pair, optim_config, fast_trainer):
        """Test that initialisation needs pairs."""
        with pytest.raises(RejectedInputError):
            init_train(tiny_pair, PairedCorpus([]), optim_config, fast_trainer)

    def test_train_direction_leaves_other_decoder(self, tiny_pair, tiny_paired, optim_config, fast_trainer):
        """Test that training the forward direction never moves the backward decoder."""
        bwd = tiny_pair.decoder_digest(BACKWARD)
        train_direction(
            "fwd", tiny_pair, tiny_paired.pairs, FORWARD, optim_config, fast_trainer, []
        )
        assert tiny_pair.decoder_digest(BACKWARD) == bwd

    def test_multitask_leaves_backward_decoder(
        self, tiny_pair, tiny_paired, tiny_mono, optim_config, fast_trainer
    ):
        """Test that multi-task training updates only the encoder and forward decoder."""
        bwd = tiny_pair.decoder_digest(BACKWARD)
        fwd = tiny_pair.decoder_digest(FORWARD)
        result = multitask_train(tiny_pair, tiny_paired, tiny_mono, 0.5, optim_config, fast_trainer)
        assert result.name == "multitask"
        assert tiny_pair.decoder_digest(BACKWARD) == bwd
        assert tiny_pair.decoder_digest(FORWARD) != fwd

    @pytest.mark.parametrize("ratio", [0.0, 1.0, 1.5])
    def test_multitask_ratio_bounds(self, tiny_pair, tiny_paired, tiny_mono, optim_config, fast_trainer, ratio):
        """Test that the mixing ratio must lie strictly inside (0, 1)."""
        with pytest.raises(ConfigError):
            multitask_train(tiny_pair, tiny_paired, tiny_mono, ratio, optim_config, fast_trainer)


class TestBackTranslation:
    """Test suite for back-translation phases and the iteration driver."""

    def test_pseudo_pair_falls_back_to_unk(self, tiny_pair, monkeypatch):
        """Test that an all-empty beam yields an UNK source."""
        monkeypatch.setattr(
            back_translation,
            "beam_search",
            lambda scorer, src, beam, max_len: [Hypothesis(tokens=[EOS_ID], logprob=-0.1)],
        )
        pseudo = generate_pseudo_pairs(tiny_pair, [[4, 5]], BACKWARD, 2, "backward")
        assert pseudo[0].source == [UNK_ID]
        assert pseudo[0].target == [4, 5]

    def test_pseudo_pair_skips_empty_best(self, tiny_pair, monkeypatch):
        """Test that the best non-empty hypothesis is used."""
        monkeypatch.setattr(
            back_translation,
            "beam_search",
            lambda scorer, src, beam, max_len: [
                Hypothesis(tokens=[EOS_ID], logprob=-0.1),
                Hypothesis(tokens=[7, EOS_ID], logprob=-0.5),
            ],
        )
        pseudo = generate_pseudo_pairs(tiny_pair, [[4]], FORWARD, 2, "forward")
        assert pseudo[0].source == [7]

    def test_backward_phase_freezes_backward_decoder(
        self, tiny_pair, tiny_mono, optim_config, fast_trainer
    ):
        """Test that only P_f learns while P_b supplies pseudo contexts."""
        bwd = tiny_pair.decoder_digest(BACKWARD)
        fwd = tiny_pair.decoder_digest(FORWARD)
        result = backward_phase(tiny_pair, tiny_mono, optim_config, fast_trainer)
        assert tiny_pair.decoder_digest(BACKWARD) == bwd
        assert tiny_pair.decoder_digest(FORWARD) != fwd
        assert len(result.pseudo_pairs) == len(tiny_mono)
        assert all(p.origin == "backward" for p in result.pseudo_pairs)
        assert [p.target for p in result.pseudo_pairs] == tiny_mono.utterances

    def test_forward_phase_freezes_forward_decoder(
        self, tiny_pair, tiny_paired, optim_config, fast_trainer
    ):
        """Test that only P_b learns while P_f answers real contexts."""
        fwd = tiny_pair.decoder_digest(FORWARD)
        result = forward_phase(tiny_pair, tiny_paired, optim_config, fast_trainer)
        assert tiny_pair.decoder_digest(FORWARD) == fwd
        assert [p.target for p in result.pseudo_pairs] == tiny_paired.contexts

    def test_frozen_decoder_change_is_detected(
        self, tiny_pair, tiny_mono, optim_config, fast_trainer, monkeypatch
    ):
        """Test that a phase touching its frozen decoder raises."""

        def tampering(name, pair, pairs, direction, optim, config, held_out):
            pair.decoder_parameters(BACKWARD)[0].value.data += 0.5
            return PhaseResult(name=name)

        monkeypatch.setattr(back_translation, "train_direction", tampering)
        with pytest.raises(FrozenParameterError):
            backward_phase(tiny_pair, tiny_mono, optim_config, fast_trainer)

    def test_zero_iterations_measures_once(
        self, tiny_pair, tiny_paired, tiny_mono, optim_config, fast_trainer
    ):
        """Test that N = 0 records only the post-initialisation trace entry."""
        config = fast_trainer.model_copy(update={"num_iterations": 0})
        result = run_bt(tiny_pair, tiny_paired, tiny_mono, optim_config, config)
        assert len(result.trace) == 1
        assert result.phases == []
        assert result.trace.fwd_ppl[0] > 1.0

    def test_one_iteration(self, tiny_pair, tiny_paired, tiny_mono, optim_config, fast_trainer):
        """Test a full backward/forward round with the callback."""
        seen = []
        result = run_bt(
            tiny_pair,
            tiny_paired,
            tiny_mono,
            optim_config,
            fast_trainer,
            on_iteration=lambda k, pair, trace: seen.append((k, len(trace))),
        )
        assert [p.name for p in result.phases] == ["backward", "forward"]
        assert len(result.trace) == 2
        assert seen == [(1, 2)]
        assert not result.stopped_early

    def test_stops_on_forward_perplexity_regression(
        self, tiny_pair, tiny_paired, tiny_mono, optim_config, fast_trainer, monkeypatch
    ):
        """Test early stopping after consecutive forward-perplexity increases."""
        values = iter([(5.0, 5.0), (6.0, 4.0), (7.0, 3.0), (8.0, 2.0), (9.0, 1.5)])
        monkeypatch.setattr(back_translation, "measure_iteration", lambda *a: next(values))
        monkeypatch.setattr(back_translation, "backward_phase", lambda *a: PhaseResult("backward"))
        monkeypatch.setattr(back_translation, "forward_phase", lambda *a: PhaseResult("forward"))
        config = fast_trainer.model_copy(update={"num_iterations": 4, "regression_patience": 2})
        result = run_bt(tiny_pair, tiny_paired, tiny_mono, optim_config, config)
        assert result.stopped_early
        assert result.trace.fwd_ppl == [5.0, 6.0, 7.0]
        assert len(result.phases) == 4

    def test_requires_both_corpora(self, tiny_pair, tiny_paired, optim_config, fast_trainer):
        """Test that an empty monologue corpus is rejected."""
        with pytest.raises(RejectedInputError):
            run_bt(tiny_pair, tiny_paired, MonoCorpus([]), optim_config, fast_trainer)


class TestAuxiliaryModels:
    """Test suite for the fusion LM and the discriminator."""

    def test_negatives_follow_each_gold_pair(self):
        """Test labels and that a negative never reuses its own response."""
        pairs = [([4], [5]), ([6], [7]), ([8], [9])]
        labeled = with_negatives(pairs, np.random.default_rng(0))
        assert [label for _, _, label in labeled] == [1, 0, 1, 0, 1, 0]
        for k in range(0, 6, 2):
            gold_ctx, gold_resp, _ = labeled[k]
            neg_ctx, neg_resp, _ = labeled[k + 1]
            assert neg_ctx == gold_ctx
            assert neg_resp != gold_resp

    def test_negatives_need_two_pairs(self):
        """Test that a single pair cannot provide a mismatch."""
        with pytest.raises(RejectedInputError):
            with_negatives([([4], [5])], np.random.default_rng(0))

    def test_language_model_trains(self, tiny_model_config, tiny_mono, optim_config, fast_trainer):
        """Test that LM training runs its step budget."""
        lm = LanguageModel(tiny_model_config, named_rng(0, "init"))
        result = train_language_model(lm, tiny_mono, optim_config, fast_trainer)
        assert result.steps == 3

    def test_discriminator_trains(self, tiny_model_config, tiny_paired, optim_config, fast_trainer):
        """Test that discriminator training runs and validates."""
        disc = Discriminator(tiny_model_config, named_rng(0, "init"))
        result = train_discriminator(disc, tiny_paired, optim_config, fast_trainer)
        assert result.steps == 3
        assert result.best_validation_loss is not None


def distinct_pairs(rng, count, low, high, length=3):
    """``count`` pairs whose contexts are all distinct and whose responses are all distinct."""
    contexts: set[tuple[int, ...]] = set()
    responses: set[tuple[int, ...]] = set()
    while len(contexts) < count:
        contexts.add(tuple(int(t) for t in rng.integers(low, high, size=length)))
    while len(responses) < count:
        responses.add(tuple(int(t) for t in rng.integers(low, high, size=length)))
    return [(list(c), list(r)) for c, r in zip(sorted(contexts), sorted(responses))]


@pytest.fixture(scope="module")
def overfit_pair():
    """A pair trained to convergence on 32 distinct pairs, and those pairs."""
    pairs = distinct_pairs(np.random.default_rng(5), 32, 4, 20)
    config = ModelConfig(vocab_size=20, embed_dim=16, hidden_dim=64, num_layers=1, max_len=8)
    pair = Seq2SeqPair(config, named_rng(0, INIT_STREAM))
    trainer = BtConfig(
        batch_size=32, max_steps_per_phase=2000, eval_every=100, patience=5, conv_epsilon=1e-4
    )
    corpus = PairedCorpus(pairs)
    init_train(pair, corpus, OptimConfig(learning_rate=0.01), trainer, corpus)
    return pair, pairs


@pytest.fixture(scope="module")
def synthetic_ids():
    """Synthetic diversity-gap corpora mapped to ids, with held-out slices."""
    corpora = synth_generate(SynthSpec(num_pairs=240, num_monologues=240), seed=7)
    pair_tokens = [(tokenize(c), tokenize(r)) for c, r in corpora.pairs]
    mono_tokens = [tokenize(m) for m in corpora.monologues]
    vocab = build_vocab(
        [[c for c, _ in pair_tokens], [r for _, r in pair_tokens], mono_tokens], min_count=1
    )
    pairs = [(vocab.encode(c), vocab.encode(r)) for c, r in pair_tokens]
    mono = [vocab.encode(m) for m in mono_tokens]
    return {
        "vocab_size": len(vocab),
        "train": PairedCorpus(pairs[:200], split="train"),
        "valid": PairedCorpus(pairs[200:], split="valid"),
        "mono": MonoCorpus(mono[:220]),
        "valid_mono": MonoCorpus(mono[220:]),
    }


def synthetic_pair(data):
    config = ModelConfig(
        vocab_size=data["vocab_size"], embed_dim=16, hidden_dim=32, num_layers=1, max_len=20
    )
    return Seq2SeqPair(config, named_rng(0, INIT_STREAM))


def greedy_responses(pair, contexts):
    scorer = Seq2SeqScorer(pair, FORWARD)
    return [greedy_decode(scorer, ctx, pair.config.max_len).content for ctx in contexts]


def ent4_or_zero(responses):
    try:
        return ent_n(responses, 4)
    except UndefinedMetricError:
        return 0.0


@pytest.mark.slow
class TestConvergence:
    """Longer runs that check learning actually happens."""

    def test_initialisation_fits_both_directions(self, overfit_pair):
        """Test that 2000 joint steps bring perplexity below 1.3 in both directions."""
        pair, pairs = overfit_pair
        assert perplexity(pair, pairs, FORWARD) < 1.3
        assert perplexity(pair, [(r, c) for c, r in pairs], BACKWARD) < 1.3

    def test_backward_phase_on_own_responses_keeps_forward_fit(self, overfit_pair):
        """Test that back-translating the paired responses barely moves the forward NLL."""
        pair, pairs = overfit_pair
        pair = pair.snapshot()
        before = batch_mean_nll(pair, pairs, FORWARD).item()
        trainer = BtConfig(
            batch_size=32,
            max_steps_per_phase=50,
            eval_every=25,
            patience=2,
            pseudo_beam_size=3,
            validation_size=32,
        )
        mono = MonoCorpus([r for _, r in pairs])
        result = backward_phase(pair, mono, OptimConfig(learning_rate=1e-4), trainer)
        recovered = sum(p.source == c for p, (c, _) in zip(result.pseudo_pairs, pairs))
        assert recovered >= 28
        after = batch_mean_nll(pair, pairs, FORWARD).item()
        assert after <= before * 1.1


@pytest.mark.slow
class TestSyntheticCorpusEffects:
    """Back translation and multi-task training on the synthetic diversity-gap corpus."""

    def test_back_translation_diversifies_responses(self, synthetic_ids):
        """Test that Dist-2 and Ent-4 rise over iterations and forward perplexity does not."""
        pair = synthetic_pair(synthetic_ids)
        optim = OptimConfig(learning_rate=0.01)
        trainer = BtConfig(
            num_iterations=3,
            max_steps_per_phase=400,
            batch_size=16,
            eval_every=100,
            validation_size=16,
        )
        contexts = synthetic_ids["valid"].contexts
        init_train(pair, synthetic_ids["train"], optim, trainer, synthetic_ids["valid"])
        before = greedy_responses(pair, contexts)

        result = run_bt(
            pair,
            synthetic_ids["train"],
            synthetic_ids["mono"],
            optim,
            trainer,
            valid=synthetic_ids["valid"],
            valid_mono=synthetic_ids["valid_mono"],
        )
        after = greedy_responses(result.pair, contexts)

        assert not result.stopped_early
        assert len(result.trace) == 4
        assert dist_n(after, 2) > dist_n(before, 2)
        assert ent4_or_zero(after) > ent4_or_zero(before)
        fwd = result.trace.fwd_ppl
        assert all(later <= earlier for earlier, later in zip(fwd[1:], fwd[2:]))

    def test_multitask_generations_borrow_monologue_ngrams(self, synthetic_ids):
        """Test that sampled responses contain a bigram seen only in the monologue corpus."""
        pair = synthetic_pair(synthetic_ids)
        trainer = BtConfig(max_steps_per_phase=600, batch_size=16, eval_every=100, validation_size=16)
        multitask_train(
            pair,
            synthetic_ids["train"],
            synthetic_ids["mono"],
            0.5,
            OptimConfig(learning_rate=0.01),
            trainer,
            synthetic_ids["valid"],
        )
        scorer = Seq2SeqScorer(pair, FORWARD)
        rng = named_rng(0, "decode-sample")
        generations = [
            nucleus_sample(scorer, ctx, pair.config.max_len, 0.95, rng).content
            for ctx in synthetic_ids["valid"].contexts
            for _ in range(5)
        ]
        novel, _ = novelty_rates(
            generations, synthetic_ids["train"].responses, synthetic_ids["mono"].utterances
        )
        assert novel > 0.0
