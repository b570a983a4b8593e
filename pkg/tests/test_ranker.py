import math

import numpy as np
import pytest
import scipy.stats

from riskrank.errors import DegenerateCovarianceError, DomainError, ParseError, TrainingError
from riskrank.ranker import (
    SynthConfig,
    TrainConfig,
    bound_probe,
    confidence_bound,
    forward_deterministic,
    forward_sample,
    gaussian_confidence_bound,
    gaussian_moments,
    init_ranker,
    last_layer_gaussian,
    load_checkpoint,
    sample_scores,
    sampling_overhead,
    save_checkpoint,
    score_features,
    synth_dataset,
    train,
)
from riskrank.ranker.model import Dense, MlpRanker, logit
from riskrank.ranker.synth import FeatureSet, parse_features, parse_pairs, write_features, write_pairs
from riskrank.ranker.train import gaussian_nll, objective, pair_loss

from oracles import gradient_errors, random_case

SURE = -40.0  # rate logit whose keep probability rounds to exactly 1


def tiny_head(out_weight, keep: float, hidden_keep: float = 1.0) -> MlpRanker:
    """Identity trunk and hidden layer feeding an output layer with the given weights."""
    k = len(out_weight)
    eye = Dense(np.eye(k), np.zeros(k))
    rates = [SURE if hidden_keep == 1.0 else logit(1 - hidden_keep), SURE if keep == 1.0 else logit(1 - keep)]
    return MlpRanker([eye], Dense(np.eye(k), np.zeros(k)), Dense(np.array(out_weight, dtype=float)[:, None], np.zeros(1)), rates)


class TestGradients:
    @pytest.mark.parametrize("loss", ["relaxed_hinge", "pairwise_ce"])
    @pytest.mark.parametrize("seed", range(20))
    def test_finite_differences(self, seed, loss):
        weights, rates = gradient_errors(seed, loss)
        assert weights <= 1e-5
        assert rates <= 1e-5

    def test_ungated_objective_has_no_rate_gradient(self):
        model, x_pos, x_neg, _ = random_case(0)
        _, grads = objective(model, x_pos, x_neg, None, TrainConfig())
        np.testing.assert_array_equal(grads[-1], [0.0, 0.0])


class TestLosses:
    def test_hinge_zero_at_margin(self):
        assert pair_loss(1.0, "relaxed_hinge") == 0.0

    def test_cross_entropy_at_tie(self):
        assert pair_loss(0.0, "pairwise_ce") == pytest.approx(math.log(2))

    def test_unknown(self):
        with pytest.raises(DomainError):
            pair_loss(0.0, "hinge")
        with pytest.raises(DomainError):
            TrainConfig(loss="hinge")

    @pytest.mark.parametrize("tau", [0.5, 1.0, 3.0])
    def test_hinge_is_gaussian_nll_up_to_constant(self, tau):
        g = np.linspace(-3, 3, 13)
        diff = pair_loss(g, "relaxed_hinge", tau) - gaussian_nll(1.0, g, tau)
        np.testing.assert_allclose(diff, diff[0], atol=1e-12)
        # Same curvature as the normal log-density.
        logpdf = scipy.stats.norm.logpdf(1.0, loc=g, scale=1 / math.sqrt(tau))
        np.testing.assert_allclose(gaussian_nll(1.0, g, tau), -logpdf, rtol=1e-12)

    def test_cross_entropy_stable_for_large_margins(self):
        assert pair_loss(-1000.0, "pairwise_ce") == pytest.approx(1000.0)
        assert pair_loss(1000.0, "pairwise_ce") == 0.0


class TestForward:
    def test_bernoulli_variance(self):
        m, a, q = 1.5, 2.0, 0.7
        model = tiny_head([m], keep=q)
        s = sample_scores(model, [a], 10_000, np.random.default_rng(0))
        assert np.var(s, ddof=1) == pytest.approx(m * m * a * a * (1 - q) / q, rel=0.05)

    def test_deterministic_is_monte_carlo_mean_in_linear_regime(self):
        rng = np.random.default_rng(1)
        k = 6
        trunk = [Dense(np.abs(rng.normal(size=(3, k))), np.zeros(k))]
        model = MlpRanker(trunk, Dense(np.abs(rng.normal(size=(k, k))), np.full(k, 0.1)), Dense(rng.normal(size=(k, 1)), np.array([0.2])), [logit(0.3), logit(0.4)])
        x = np.abs(rng.normal(size=3))
        s = sample_scores(model, x, 100_000, np.random.default_rng(2))
        se = s.std(ddof=1) / math.sqrt(s.size)
        assert abs(s.mean() - forward_deterministic(model, x)) < 3 * se

    def test_no_dropout_sample_equals_deterministic(self):
        model = init_ranker(4, 5, 2, seed=3)
        model.logit_p[:] = SURE
        x = np.random.default_rng(0).normal(size=4)
        assert forward_sample(model, x, np.random.default_rng(9)) == pytest.approx(forward_deterministic(model, x), abs=1e-12)

    def test_zero_input_zero_bias(self):
        model = init_ranker(4, 5, 2, seed=3)
        assert forward_deterministic(model, np.zeros(4)) == 0.0
        assert forward_sample(model, np.zeros(4), np.random.default_rng(0)) == 0.0

    def test_seeded_reproducibility(self):
        model = init_ranker(4, 5, 2, seed=3)
        x = np.ones(4)
        a = sample_scores(model, x, 50, np.random.default_rng(5))
        b = sample_scores(model, x, 50, np.random.default_rng(5))
        np.testing.assert_array_equal(a, b)

    def test_single_sample(self):
        assert sample_scores(init_ranker(4, 5, 2), np.ones(4), 1).shape == (1,)

    def test_batch_matches_rows(self):
        model = init_ranker(4, 5, 2, seed=3)
        x = np.random.default_rng(0).normal(size=(7, 4))
        np.testing.assert_allclose(forward_deterministic(model, x), [forward_deterministic(model, r) for r in x])

    def test_bad_inputs(self):
        model = init_ranker(4, 5, 2)
        with pytest.raises(DomainError, match="dimension"):
            forward_deterministic(model, np.ones(3))
        with pytest.raises(DomainError):
            sample_scores(model, np.ones(4), 0)
        with pytest.raises(DomainError):
            init_ranker(4, drop_rate=1.0)


class TestTraining:
    def test_learns_linearly_separable_pairs(self):
        rng = np.random.default_rng(0)
        w = rng.normal(size=5)
        w /= np.linalg.norm(w)
        a, b = rng.normal(size=(2, 4000, 5))
        margin = (a - b) @ w
        keep = np.abs(margin) > 0.25
        a, b, margin = a[keep][:1500], b[keep][:1500], margin[keep][:1500]
        pos = np.where(margin[:, None] > 0, a, b)
        neg = np.where(margin[:, None] > 0, b, a)
        model, trace = train(init_ranker(5, 16, 2, seed=1), pos[:1000], neg[:1000], TrainConfig())
        gap = forward_deterministic(model, pos[1000:]) - forward_deterministic(model, neg[1000:])
        assert np.mean(gap > 0) >= 0.95
        assert trace[-1] < trace[0]

    def test_input_model_untouched_and_reproducible(self):
        rng = np.random.default_rng(0)
        pos, neg = rng.normal(size=(2, 64, 3))
        start = init_ranker(3, 4, 1)
        before = start.get_flat()
        a, trace_a = train(start, pos, neg, TrainConfig(epochs=3))
        b, trace_b = train(start, pos, neg, TrainConfig(epochs=3))
        np.testing.assert_array_equal(start.get_flat(), before)
        np.testing.assert_array_equal(a.get_flat(), b.get_flat())
        assert trace_a == trace_b

    @pytest.mark.parametrize("flags", [dict(dropout=False), dict(learn_rates=False)])
    def test_frozen_rates(self, flags):
        rng = np.random.default_rng(0)
        pos, neg = rng.normal(size=(2, 64, 3))
        start = init_ranker(3, 4, 1, drop_rate=0.3)
        model, _ = train(start, pos, neg, TrainConfig(epochs=2, **flags))
        np.testing.assert_array_equal(model.logit_p, start.logit_p)

    def test_learned_rates_move(self):
        rng = np.random.default_rng(0)
        pos, neg = rng.normal(size=(2, 64, 3))
        start = init_ranker(3, 4, 1, drop_rate=0.3)
        model, _ = train(start, pos, neg, TrainConfig(epochs=2))
        assert not np.array_equal(model.logit_p, start.logit_p)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergence_reported(self):
        rng = np.random.default_rng(0)
        pos, neg = rng.normal(scale=1e3, size=(2, 64, 3))
        with pytest.raises(TrainingError, match="epoch"):
            train(init_ranker(3, 8, 2), pos, neg, TrainConfig(learning_rate=1e6, clip_norm=0.0, epochs=5))

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            train(init_ranker(3), np.ones((4, 3)), np.ones((5, 3)), TrainConfig())


class TestCheckpoint:
    def test_round_trip_with_meta(self):
        model = init_ranker(4, 5, 3, drop_rate=0.2, seed=7)
        model.logit_p[1] = 0.123456789
        text = save_checkpoint(model, {"config.epochs": 30, "input.pairs": "sha256:ab"})
        assert "meta config.epochs 30\n" in text
        again = load_checkpoint(text.encode())
        np.testing.assert_array_equal(again.get_flat(), model.get_flat())
        assert (again.seed, again.depth) == (7, 3)
        assert save_checkpoint(again, {"config.epochs": 30, "input.pairs": "sha256:ab"}) == text

    def test_meta_must_be_single_token(self):
        with pytest.raises(DomainError):
            save_checkpoint(init_ranker(2), {"a b": 1})

    def test_not_a_checkpoint(self):
        with pytest.raises(ParseError, match="line 1"):
            load_checkpoint("hello\n")

    def test_truncated(self):
        text = save_checkpoint(init_ranker(2, 3, 1))
        with pytest.raises(ParseError):
            load_checkpoint(text.rsplit("array", 1)[0])


class TestSynth:
    small = SynthConfig(dim=6, n_queries=8, docs_per_query=20, train_queries=10, pairs_per_query=5)

    def test_deterministic(self):
        a, b = synth_dataset(self.small), synth_dataset(self.small)
        np.testing.assert_array_equal(a.x_pos, b.x_pos)
        np.testing.assert_array_equal(a.shifted.features, b.shifted.features)
        assert a.qrels == b.qrels

    def test_seed_changes_data(self):
        other = SynthConfig(**{**self.small.as_dict(), "seed": 1})
        assert not np.array_equal(synth_dataset(self.small).eval.features, synth_dataset(other).eval.features)

    def test_zero_shift_equals_eval(self):
        data = synth_dataset(SynthConfig(**{**self.small.as_dict(), "shift": 0.0}))
        np.testing.assert_array_equal(data.eval.features, data.shifted.features)

    def test_shapes_and_ids(self):
        data = synth_dataset(self.small)
        assert data.eval.features.shape == (160, 6)
        assert data.x_pos.shape == data.x_neg.shape and data.x_pos.shape[1] == 6
        assert data.eval.query_ids[:2] == ("q0", "q0") and data.eval.doc_ids[:2] == ("d0", "d1")
        assert len(data.qrels) == 160

    def test_grades_follow_inner_product(self):
        data = synth_dataset(SynthConfig(n_queries=20, train_queries=1))
        grades = [data.qrels.grade(q, d) for q, d in zip(data.eval.query_ids, data.eval.doc_ids)]
        rho = scipy.stats.spearmanr(data.inner_products, grades).statistic
        assert rho > 0.5

    def test_validation(self):
        with pytest.raises(DomainError):
            SynthConfig(dim=0)
        with pytest.raises(DomainError):
            SynthConfig(docs_per_query=1)
        with pytest.raises(DomainError):
            SynthConfig(hetero=-1.0)

    def test_feature_file_round_trip(self):
        fs = synth_dataset(self.small).eval
        again = parse_features(write_features(fs))
        assert again.query_ids == fs.query_ids and again.doc_ids == fs.doc_ids
        np.testing.assert_array_equal(again.features, fs.features)

    def test_pair_file_round_trip(self):
        data = synth_dataset(self.small)
        pos, neg = parse_pairs(write_pairs(data.x_pos, data.x_neg))
        np.testing.assert_array_equal(pos, data.x_pos)
        np.testing.assert_array_equal(neg, data.x_neg)

    def test_ragged_feature_file(self):
        with pytest.raises(ParseError, match="line 2"):
            parse_features("q\td\t1\t2\nq\te\t1\n")


class TestBound:
    def test_no_dropout_has_no_spread(self):
        mu, sigma = gaussian_moments([1.0, -2.0], 1.0)
        np.testing.assert_array_equal(mu, [1.0, -2.0])
        np.testing.assert_array_equal(sigma, np.zeros((2, 2)))

    def test_half_keep(self):
        mu, sigma = gaussian_moments([1.0, 1.0], 0.5)
        np.testing.assert_allclose(mu, [0.5, 0.5])
        np.testing.assert_allclose(sigma, np.diag([0.25, 0.25]))

    def test_moments_match_sampling(self):
        m, q = np.array([0.7, -1.2, 2.0]), 0.6
        rng = np.random.default_rng(0)
        draws = m * (rng.random((200_000, 3)) < q)
        mu, sigma = gaussian_moments(m, q)
        np.testing.assert_allclose(draws.mean(axis=0), mu, atol=0.01)
        np.testing.assert_allclose(np.cov(draws.T), sigma, atol=0.02)

    def test_stored_weight_is_the_mean(self):
        model = tiny_head([0.3, -0.4], keep=0.8)
        mu, _ = last_layer_gaussian(model)
        np.testing.assert_allclose(mu, [0.3, -0.4])

    def test_zero_mean_gives_half(self):
        assert gaussian_confidence_bound(np.zeros(3), np.eye(3)) == 0.5

    def test_non_increasing_in_smallest_eigenvalue(self):
        mu = np.array([0.3, -1.0])
        values = [gaussian_confidence_bound(mu, np.diag([lam, 5.0])) for lam in (0.1, 0.5, 1.0, 2.0, 5.0)]
        assert values == sorted(values, reverse=True)

    def test_unit_mean_unit_eigenvalue(self):
        # W = (1, 1)/sqrt(2) with keep 1/3: ||mu|| = 1 and Sigma = I.
        model = tiny_head([1 / math.sqrt(2)] * 2, keep=1 / 3)
        _, sigma = last_layer_gaussian(model)
        np.testing.assert_allclose(sigma, np.eye(2), atol=1e-12)
        assert confidence_bound(model) == pytest.approx(0.8314, abs=1e-4)

    def test_degenerate_covariance(self):
        with pytest.raises(DegenerateCovarianceError):
            confidence_bound(tiny_head([1.0, 0.0], keep=0.5))
        with pytest.raises(DegenerateCovarianceError):
            confidence_bound(tiny_head([1.0, 1.0], keep=1.0))

    def test_zero_scale_is_undecided(self):
        model = tiny_head([0.5, -1.0], keep=0.5)
        (row,) = bound_probe(model, [1.0, 1.0], deltas=[0.0])
        assert row.confidence == 0.5

    def test_bound_constant_across_scales(self):
        model = tiny_head([0.5, -1.0], keep=0.5)
        rows = bound_probe(model, [1.0, 2.0])
        assert len({r.bound for r in rows}) == 1
        assert [r.delta for r in rows] == [1.0, 10.0, 100.0, 1000.0, 10000.0]

    def test_probe_respects_bound_on_random_models(self):
        for seed in range(10):
            model = init_ranker(4, 6, 2, drop_rate=0.5, seed=seed)
            rng = np.random.default_rng(seed)
            bound = confidence_bound(model)
            for _ in range(5):
                for row in bound_probe(model, rng.normal(size=4), rng=rng):
                    assert row.confidence <= bound + 0.02

    def test_large_scale_limit_is_normal_cdf(self):
        # Isotropic covariance, input along mu: as the scale grows the mean
        # logistic tends to Phi(||mu|| / sqrt(lambda)), which the logistic
        # ceiling approximates to within 0.018.
        model = tiny_head([0.6, 0.6], keep=0.5)
        mu, sigma = last_layer_gaussian(model)
        rows = bound_probe(model, mu / np.linalg.norm(mu), deltas=[1e4], n=400_000)
        limit = scipy.stats.norm.cdf(np.linalg.norm(mu) / math.sqrt(sigma[0, 0]))
        assert rows[0].confidence == pytest.approx(limit, abs=3e-3)
        assert rows[0].confidence <= confidence_bound(model) + 0.02

class TestScoring:
    def features(self, n_queries=3, docs=4, dim=3):
        rng = np.random.default_rng(0)
        qids = tuple(f"q{i}" for i in range(n_queries) for _ in range(docs))
        dids = tuple(f"d{j}" for _ in range(n_queries) for j in range(docs))
        return FeatureSet(qids, dids, rng.normal(size=(n_queries * docs, dim)))

    def test_threads_do_not_change_output(self):
        model, fs = init_ranker(3, 5, 2, drop_rate=0.3), self.features()
        assert score_features(model, fs, 20, threads=1) == score_features(model, fs, 20, threads=4)

    def test_deterministic_mode_is_mean_network(self):
        model, fs = init_ranker(3, 5, 2, drop_rate=0.3), self.features()
        run = score_features(model, fs, deterministic=True)
        assert run.n_samples("q0") == 1
        np.testing.assert_allclose(run.docs("q1")["d2"], [forward_deterministic(model, fs.features[6])])

    def test_document_draws_independent_of_neighbours(self):
        model, fs = init_ranker(3, 5, 2, drop_rate=0.3), self.features()
        full = score_features(model, fs, 10)
        alone = score_features(model, FeatureSet(fs.query_ids[5:6], fs.doc_ids[5:6], fs.features[5:6]), 10)
        # Gates match exactly; trunk products may differ in the last bit between batch sizes.
        np.testing.assert_allclose(full.docs("q1")["d1"], alone.docs("q1")["d1"], rtol=1e-12, atol=1e-12)

    def test_seed_changes_draws(self):
        model, fs = init_ranker(3, 5, 2, drop_rate=0.3), self.features()
        assert score_features(model, fs, 10, seed=0) != score_features(model, fs, 10, seed=1)

    def test_duplicate_rows(self):
        fs = FeatureSet(("q", "q"), ("d", "d"), np.zeros((2, 3)))
        with pytest.raises(DomainError, match="duplicate"):
            score_features(init_ranker(3), fs)

    def test_bench_rows(self):
        rows = sampling_overhead(depths=(1, 3), extra=10, docs=5, repeats=1)
        assert [r.depth for r in rows] == [1, 3]
        assert all(r.base_us > 0 and math.isfinite(r.overhead_us) for r in rows)
