"""Tests for greedy, beam, diverse beam, nucleus, fused and MMI decoding."""

import numpy as np
import pytest

from dialogue_bt.corpus.vocab import BOS_ID, EOS_ID, PAD_ID
from dialogue_bt.decoding import (
    FusedScorer,
    LanguageModelScorer,
    Seq2SeqScorer,
    beam_search,
    decode,
    diverse_beam_search,
    greedy_decode,
    mix_distributions,
    mmi_scores,
    nucleus_filter,
    nucleus_sample,
    nucleus_support,
    rank_by_score,
)
from dialogue_bt.decoding.beam import mask_banned
from dialogue_bt.decoding.mmi import dedupe_candidates, mmi_rerank, rerank_candidates
from dialogue_bt.exceptions import ConfigError
from dialogue_bt.models.results import Hypothesis
from dialogue_bt.models.schemas import DecodeConfig, ModelConfig
from dialogue_bt.neural.language_model import LanguageModel
from dialogue_bt.neural.seq2seq import FORWARD, Seq2SeqPair
from dialogue_bt.numcore.rng import named_rng
from dialogue_bt.numcore.tensor import log_softmax_array


def exhaustive_scores(scorer, src, max_len):
    """Score every finishable sequence of length <= max_len by walking the full prefix tree."""
    scored = {}

    def expand(state, prev, prefix, total):
        logp, state = scorer.step(state, np.array([prev]))
        row = mask_banned(logp)[0]
        for tok in range(scorer.vocab_size):
            if tok in (PAD_ID, BOS_ID):
                continue
            tokens = prefix + (tok,)
            score = total + float(row[tok])
            if tok == EOS_ID or len(tokens) == max_len:
                scored[tokens] = score
            else:
                expand(state, tok, tokens, score)

    expand(scorer.initial_state(src), BOS_ID, (), 0.0)
    return scored


def random_pair(seed, vocab_size=7, stream="init"):
    """Small pair whose weights are redrawn uniformly from [-3, 3]."""
    config = ModelConfig(vocab_size=vocab_size, embed_dim=3, hidden_dim=4, num_layers=1, max_len=6)
    pair = Seq2SeqPair(config, named_rng(seed, stream))
    rng = named_rng(seed, f"{stream}-uniform")
    for p in pair.parameters():
        p.value.data[...] = rng.uniform(-3.0, 3.0, size=p.shape)
    return pair


class TestGreedyAndBeam:
    """Test suite for greedy and beam search."""

    def test_greedy_never_emits_banned_tokens(self, table_scorer):
        """Test that PAD and BOS are never produced."""
        hyp = greedy_decode(table_scorer, [4, 5], max_len=6)
        assert PAD_ID not in hyp.tokens
        assert BOS_ID not in hyp.tokens
        assert len(hyp.tokens) <= 6

    def test_beam_width_one_equals_greedy(self, table_scorer):
        """Test that a single beam follows the greedy path."""
        greedy = greedy_decode(table_scorer, [4], max_len=5)
        beam = beam_search(table_scorer, [4], beam_size=1, max_len=5)
        assert beam[0].tokens == greedy.tokens
        assert beam[0].logprob == pytest.approx(greedy.logprob)

    def test_wide_beam_matches_exhaustive_search(self, table_scorer):
        """Test that a beam wider than the frontier finds the exact top hypotheses."""
        src = [6]
        oracle = exhaustive_scores(table_scorer, src, max_len=3)
        best = sorted(oracle.items(), key=lambda kv: -kv[1])[:64]
        hyps = beam_search(table_scorer, src, beam_size=64, max_len=3)
        assert len(hyps) == 64
        assert [tuple(h.tokens) for h in hyps] == [k for k, _ in best]
        np.testing.assert_allclose([h.logprob for h in hyps], [v for _, v in best])

    @pytest.mark.parametrize("vocab_size", [4, 7])
    def test_wide_beam_matches_exhaustive_search_on_random_models(self, vocab_size):
        """Test exact beam results against enumeration on 100 random seq2seq models."""
        for seed in range(100):
            pair = random_pair(seed, vocab_size)
            scorer = Seq2SeqScorer(pair, FORWARD)
            src = [vocab_size - 1, 3]
            oracle = exhaustive_scores(scorer, src, max_len=3)
            best = sorted(oracle.items(), key=lambda kv: -kv[1])[:64]
            hyps = beam_search(scorer, src, beam_size=64, max_len=3)
            assert tuple(hyps[0].tokens) == best[0][0], f"seed {seed}"
            assert [tuple(h.tokens) for h in hyps] == [k for k, _ in best], f"seed {seed}"
            np.testing.assert_allclose([h.logprob for h in hyps], [v for _, v in best], rtol=1e-9)

    def test_beam_results_sorted(self, table_scorer):
        """Test that hypotheses come back best first."""
        hyps = beam_search(table_scorer, [5], beam_size=4, max_len=4)
        scores = [h.logprob for h in hyps]
        assert scores == sorted(scores, reverse=True)
        assert all(h.finished for h in hyps)

    def test_hypothesis_content_strips_eos(self):
        """Test that content omits only the terminal EOS."""
        assert Hypothesis(tokens=[4, 5, EOS_ID], logprob=0.0).content == [4, 5]
        assert Hypothesis(tokens=[4, 5], logprob=0.0).content == [4, 5]

    def test_mask_banned_does_not_renormalise(self):
        """Test that masking keeps the other log-probabilities unchanged."""
        logp = np.log(np.full(5, 0.2))
        masked = mask_banned(logp)
        assert masked[PAD_ID] == -np.inf
        assert masked[BOS_ID] == -np.inf
        np.testing.assert_allclose(masked[2:], logp[2:])


class TestDiverseBeam:
    """Test suite for grouped beam search with a Hamming penalty."""

    def test_groups_must_divide_beam(self, table_scorer):
        """Test that an uneven split raises ConfigError."""
        with pytest.raises(ConfigError):
            diverse_beam_search(table_scorer, [4], 5, 4, num_groups=2, diversity_strength=0.5)

    def test_large_penalty_forces_distinct_first_tokens(self, table_scorer):
        """Test that the second group avoids the token the first group chose."""
        hyps = diverse_beam_search(table_scorer, [4], 2, 4, num_groups=2, diversity_strength=1e6)
        first = {h.group: h.tokens[0] for h in hyps}
        assert set(first) == {0, 1}
        assert first[0] != first[1]

    def test_zero_penalty_groups_agree(self, table_scorer):
        """Test that without a penalty every group finds the same best sequence."""
        hyps = diverse_beam_search(table_scorer, [4], 2, 4, num_groups=2, diversity_strength=0.0)
        by_group = {}
        for h in hyps:
            by_group.setdefault(h.group, h)
        assert by_group[0].tokens == by_group[1].tokens

    def test_scores_exclude_penalty(self, table_scorer):
        """Test that reported log-probabilities are the raw model sums."""
        hyps = diverse_beam_search(table_scorer, [4], 4, 3, num_groups=2, diversity_strength=2.0)
        for h in hyps:
            path, total = (4,), 0.0
            for tok in h.tokens:
                total += float(mask_banned(table_scorer.logprobs(path))[tok])
                path += (tok,)
            assert h.logprob == pytest.approx(total)

    def test_single_group_equals_beam_search_on_random_models(self):
        """Test that one group with any penalty reproduces plain beam search on 20 random models."""
        for seed in range(20):
            scorer = Seq2SeqScorer(random_pair(seed), FORWARD)
            src = [4, 5, 6]
            plain = beam_search(scorer, src, beam_size=4, max_len=5)
            grouped = diverse_beam_search(scorer, src, 4, 5, num_groups=1, diversity_strength=3.0)
            assert [h.tokens for h in grouped] == [h.tokens for h in plain], f"seed {seed}"
            assert [h.logprob for h in grouped] == [h.logprob for h in plain]


class TestNucleus:
    """Test suite for top-p filtering and sampling."""

    def test_filter_renormalises_support(self):
        """Test the smallest prefix reaching p and its renormalised mass."""
        probs = np.array([0.5, 0.3, 0.15, 0.05])
        np.testing.assert_allclose(
            nucleus_filter(probs, 0.9), [0.5263, 0.3158, 0.1579, 0.0], atol=1e-4
        )

    def test_support_is_minimal_at_exact_boundary(self):
        """Test that reaching p exactly stops the prefix."""
        probs = np.array([0.5, 0.3, 0.2])
        assert sorted(nucleus_support(probs, 0.8).tolist()) == [0, 1]

    def test_ties_broken_by_lower_id(self):
        """Test that equal probabilities prefer lower token ids."""
        probs = np.array([0.25, 0.25, 0.25, 0.25])
        assert nucleus_support(probs, 0.5).tolist() == [0, 1]

    def test_p_one_keeps_distribution(self):
        """Test that p = 1 leaves the distribution unchanged."""
        probs = np.array([0.1, 0.2, 0.7])
        np.testing.assert_allclose(nucleus_filter(probs, 1.0), probs)

    def test_invalid_p(self):
        """Test that p outside (0, 1] is rejected."""
        with pytest.raises(ConfigError):
            nucleus_support(np.array([0.5, 0.5]), 0.0)

    def test_sampling_frequencies(self):
        """Test empirical frequencies of draws from the filtered distribution."""
        filtered = nucleus_filter(np.array([0.5, 0.3, 0.15, 0.05]), 0.9)
        draws = np.random.default_rng(0).choice(4, size=100_000, p=filtered)
        freq = np.bincount(draws, minlength=4) / draws.size
        np.testing.assert_allclose(freq[:3], [0.5263, 0.3158, 0.1579], atol=0.01)
        assert freq[3] == 0.0

    def test_sample_is_reproducible(self, table_scorer):
        """Test that the same generator state gives the same sample."""
        a = nucleus_sample(table_scorer, [4], 6, 0.9, np.random.default_rng(5))
        b = nucleus_sample(table_scorer, [4], 6, 0.9, np.random.default_rng(5))
        assert a.tokens == b.tokens
        assert BOS_ID not in a.tokens


class TestFusion:
    """Test suite for probability-space fusion."""

    def test_mix_end_points(self):
        """Test that alpha 1 and 0 return the component log-softmaxes."""
        s2s = np.array([[1.0, 2.0, 3.0]])
        lm = np.array([[3.0, 0.0, -1.0]])
        np.testing.assert_allclose(mix_distributions(s2s, lm, 1.0), log_softmax_array(s2s))
        np.testing.assert_allclose(mix_distributions(s2s, lm, 0.0), log_softmax_array(lm))

    def test_mix_is_normalised(self):
        """Test that an interior mixture is a distribution."""
        mixed = mix_distributions(np.array([[1.0, 0.0]]), np.array([[0.0, 4.0]]), 0.3)
        assert np.exp(mixed).sum() == pytest.approx(1.0)

    def test_alpha_one_matches_seq2seq_step(self, tiny_model_config):
        """Test that fused decoding at alpha 1 reproduces the seq2seq scorer."""
        rng = named_rng(1, "init")
        pair = Seq2SeqPair(tiny_model_config, rng)
        lm = LanguageModel(tiny_model_config, rng)
        s2s = Seq2SeqScorer(pair, FORWARD)
        fused = FusedScorer(s2s, LanguageModelScorer(lm), 1.0)
        expected, _ = s2s.step(s2s.initial_state([4, 5]), np.array([BOS_ID]))
        got, _ = fused.step(fused.initial_state([4, 5]), np.array([BOS_ID]))
        np.testing.assert_allclose(got, expected)

    def test_alpha_zero_matches_language_model(self, tiny_model_config):
        """Test that alpha 0 ignores the seq2seq model."""
        rng = named_rng(1, "init")
        pair = Seq2SeqPair(tiny_model_config, rng)
        lm = LanguageModel(tiny_model_config, rng)
        lm_scorer = LanguageModelScorer(lm)
        fused = FusedScorer(Seq2SeqScorer(pair, FORWARD), lm_scorer, 0.0)
        expected, _ = lm_scorer.step(lm_scorer.initial_state(None), np.array([BOS_ID]))
        got, _ = fused.step(fused.initial_state([4]), np.array([BOS_ID]))
        np.testing.assert_allclose(got, expected)

    def test_vocab_mismatch(self, tiny_model_config):
        """Test that models over different vocabularies cannot be fused."""
        rng = named_rng(1, "init")
        pair = Seq2SeqPair(tiny_model_config, rng)
        lm = LanguageModel(tiny_model_config.model_copy(update={"vocab_size": 9}), rng)
        with pytest.raises(ConfigError):
            FusedScorer(Seq2SeqScorer(pair, FORWARD), LanguageModelScorer(lm), 0.5)

    def test_alpha_out_of_range(self, tiny_pair, tiny_model_config):
        """Test that alpha outside [0, 1] is rejected."""
        lm = LanguageModel(tiny_model_config, named_rng(2, "init"))
        with pytest.raises(ConfigError):
            FusedScorer(Seq2SeqScorer(tiny_pair, FORWARD), LanguageModelScorer(lm), 1.5)

    @pytest.mark.parametrize("alpha", [0.0, 1.0])
    def test_end_points_on_random_models(self, alpha):
        """Test stepwise fused distributions at alpha 0 and 1 on 20 random model pairs."""
        for seed in range(20):
            pair = random_pair(seed)
            lm = LanguageModel(pair.config, named_rng(seed, "lm"))
            for p in lm.parameters():
                p.value.data[...] = named_rng(seed, p.name).uniform(-3.0, 3.0, size=p.shape)
            s2s = Seq2SeqScorer(pair, FORWARD)
            lm_scorer = LanguageModelScorer(lm)
            fused = FusedScorer(s2s, lm_scorer, alpha)
            component = s2s if alpha == 1.0 else lm_scorer
            src = [4, 6]
            expected_state = component.initial_state(src)
            fused_state = fused.initial_state(src)
            prev = np.array([BOS_ID])
            for _ in range(4):
                expected, expected_state = component.step(expected_state, prev)
                got, fused_state = fused.step(fused_state, prev)
                np.testing.assert_allclose(got, expected, rtol=0.0, atol=1e-12)
                prev = np.array([int(np.argmax(mask_banned(got)[0]))])


class TestMMI:
    """Test suite for MMI reranking."""

    def test_scores_combine_directions(self):
        """Test the weighted sum of forward and backward log-probabilities."""
        np.testing.assert_allclose(mmi_scores([-1.0, -1.5], [-5.0, -2.0], 0.5), [-3.5, -2.5])

    def test_rank_is_stable(self):
        """Test that equal scores keep candidate order."""
        assert rank_by_score([-1.0, -0.5, -1.0, -0.5]) == [1, 3, 0, 2]

    def test_dedupe_keeps_first(self):
        """Test that duplicate sequences are dropped after their first occurrence."""
        a = Hypothesis(tokens=[4, EOS_ID], logprob=-1.0)
        b = Hypothesis(tokens=[4, EOS_ID], logprob=-2.0)
        c = Hypothesis(tokens=[5, EOS_ID], logprob=-3.0)
        assert dedupe_candidates([a, b, c]) == [a, c]

    def test_lambda_zero_preserves_forward_order(self, tiny_pair):
        """Test that without the backward term ranking follows P_f."""
        cands = [
            Hypothesis(tokens=[4, 5, EOS_ID], logprob=-3.0),
            Hypothesis(tokens=[6, EOS_ID], logprob=-1.0),
            Hypothesis(tokens=[7, 8, 9, EOS_ID], logprob=-2.0),
        ]
        ranked = rerank_candidates(cands, tiny_pair, [4, 4], 0.0)
        assert [h.logprob for h in ranked] == [-1.0, -2.0, -3.0]

    def test_lambda_zero_preserves_forward_order_on_random_models(self):
        """Test that lambda 0 ranks shuffled beam candidates by P_f on 20 random model pairs."""
        for seed in range(20):
            forward = random_pair(seed)
            backward = random_pair(seed, stream="backward")
            src = [4, 5]
            cands = beam_search(Seq2SeqScorer(forward, FORWARD), src, beam_size=6, max_len=4)
            order = named_rng(seed, "shuffle").permutation(len(cands))
            shuffled = [cands[i] for i in order]
            expected = sorted((h for h in shuffled if h.content), key=lambda h: -h.logprob)
            ranked = rerank_candidates(shuffled, backward, src, 0.0)
            assert [h.tokens for h in ranked] == [h.tokens for h in expected], f"seed {seed}"
            assert [h.score for h in ranked] == pytest.approx([h.logprob for h in expected])

    def test_empty_candidates_skipped(self, tiny_pair):
        """Test that a bare EOS is not scored when content candidates exist."""
        cands = [
            Hypothesis(tokens=[EOS_ID], logprob=-0.1),
            Hypothesis(tokens=[5, EOS_ID], logprob=-2.0),
        ]
        ranked = rerank_candidates(cands, tiny_pair, [4], 0.5)
        assert [h.tokens for h in ranked] == [[5, EOS_ID]]

    def test_rerank_is_reproducible(self, tiny_pair):
        """Test that the same sampling stream yields the same choice."""
        a = mmi_rerank(tiny_pair, tiny_pair, [4, 5], 6, 0.5, 5, named_rng(0, "decode-sample"))
        b = mmi_rerank(tiny_pair, tiny_pair, [4, 5], 6, 0.5, 5, named_rng(0, "decode-sample"))
        assert a.tokens == b.tokens
        assert a.score is not None

    def test_rejects_bad_candidate_count(self, tiny_pair):
        """Test that zero candidates is a configuration error."""
        with pytest.raises(ConfigError):
            mmi_rerank(tiny_pair, tiny_pair, [4], 0, 0.5, 5, named_rng(0, "decode-sample"))


class TestDecodeDispatch:
    """Test suite for strategy dispatch."""

    @pytest.mark.parametrize("strategy", ["greedy", "beam", "diverse_beam", "nucleus", "mmi"])
    def test_every_strategy_returns_a_hypothesis(self, tiny_pair, strategy):
        """Test each strategy end to end on an untrained pair."""
        config = DecodeConfig(
            strategy=strategy, beam_size=2, num_groups=2, max_len=5, mmi_candidates=4
        )
        hyp = decode(tiny_pair, [4, 5, 6], config, named_rng(0, "decode-sample"))
        assert 1 <= len(hyp.tokens) <= 5
        assert PAD_ID not in hyp.tokens

    def test_fused_requires_language_model(self, tiny_pair):
        """Test that fused decoding without an LM is a configuration error."""
        with pytest.raises(ConfigError):
            decode(tiny_pair, [4], DecodeConfig(strategy="fused"), named_rng(0, "decode-sample"))

    def test_fused_with_language_model(self, tiny_pair, tiny_model_config):
        """Test fused decoding with a matching LM."""
        lm = LanguageModel(tiny_model_config, named_rng(3, "init"))
        config = DecodeConfig(strategy="fused", beam_size=2, max_len=4, fusion_alpha=0.5)
        hyp = decode(tiny_pair, [4], config, named_rng(0, "decode-sample"), lm=lm)
        assert 1 <= len(hyp.tokens) <= 4
