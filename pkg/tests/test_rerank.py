import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskrank.core import SampleRun, mean_ranking
from riskrank.errors import DomainError
from riskrank.rerank import RerankPolicy, rerank, risk_budget
from riskrank.stats import Direction, cvar

POLICIES = [RerankPolicy(d, 0.9) for d in Direction]


def random_run(seed, n_queries=3, n_docs=6, n=20):
    rng = np.random.default_rng(seed)
    return SampleRun(
        {f"q{i}": [(f"d{j}", rng.normal(size=n)) for j in range(n_docs)] for i in range(n_queries)}
    )


class TestPolicy:
    def test_alias_direction(self):
        assert RerankPolicy("pess", 0.8).direction is Direction.PESSIMISTIC

    @pytest.mark.parametrize("alpha", [0.0, 1.0, 1.5])
    def test_tail_alpha_validated(self, alpha):
        with pytest.raises(DomainError):
            RerankPolicy("optimistic", alpha)

    def test_mean_ignores_alpha(self):
        assert RerankPolicy("mean", 3.0).direction is Direction.MEAN


class TestRerank:
    @pytest.mark.parametrize("policy", POLICIES)
    def test_single_document(self, policy):
        run = SampleRun({"q": [("only", [1.0, 2.0])]})
        assert rerank(run, policy).doc_ids("q") == ["only"]

    @pytest.mark.parametrize("policy", POLICIES)
    def test_identical_samples_tie_break(self, policy):
        run = SampleRun({"q": [("b", [1.0, 3.0]), ("a", [1.0, 3.0])]})
        assert rerank(run, policy).doc_ids("q") == ["a", "b"]

    def test_optimistic_prefers_upper_tail(self):
        run = SampleRun({"q": [("B", [1.0, 1.0]), ("A", [0.0, 2.0])]})
        assert rerank(run, RerankPolicy("optimistic", 0.75)).doc_ids("q") == ["A", "B"]
        # At alpha 0.5 the tail of A is both samples, tying with B.
        assert rerank(run, RerankPolicy("optimistic", 0.5)).doc_ids("q") == ["A", "B"]
        assert rerank(run, RerankPolicy("pessimistic", 0.75)).doc_ids("q") == ["B", "A"]

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_mean_policy_matches_mean_ranking(self, seed):
        run = random_run(seed)
        assert rerank(run, RerankPolicy("mean")) == mean_ranking(run)

    @pytest.mark.parametrize("policy", POLICIES)
    def test_single_sample_runs_agree(self, policy):
        rng = np.random.default_rng(1)
        run = SampleRun({"q": [(f"d{i}", [v]) for i, v in enumerate(rng.normal(size=10))]})
        assert rerank(run, policy).doc_ids("q") == mean_ranking(run).doc_ids("q")

    def test_scores_are_cvar(self):
        run = random_run(3)
        policy = RerankPolicy("optimistic", 0.8)
        ranking = rerank(run, policy)
        for qid, docs in ranking.queries.items():
            samples = run.docs(qid)
            for docid, score in docs:
                assert score == cvar(samples[docid], 0.8, "optimistic")

    def test_threads_do_not_change_result(self):
        run = random_run(4, n_queries=12)
        policy = RerankPolicy("pessimistic", 0.9)
        assert rerank(run, policy, threads=4) == rerank(run, policy, threads=1)

    def test_query_permutation_permutes_blocks(self):
        run = random_run(5)
        flipped = SampleRun(dict(reversed(list(run.queries.items()))))
        policy = RerankPolicy("optimistic", 0.9)
        a, b = rerank(run, policy), rerank(flipped, policy)
        assert list(b.queries) == list(reversed(list(a.queries)))
        for qid in a.queries:
            assert a.queries[qid] == b.queries[qid]

    def test_empty_query_rejected(self):
        with pytest.raises(DomainError):
            rerank(SampleRun({"q": []}), RerankPolicy())


class TestRiskBudget:
    def test_k1_is_top_document(self):
        run = random_run(6)
        policy = RerankPolicy("optimistic", 0.9)
        top = rerank(run, policy)
        budget = risk_budget(run, policy, 1)
        for qid, docs in top.queries.items():
            assert budget[qid] == docs[0][1]

    def test_constant_samples(self):
        run = SampleRun({"q": [(f"d{i}", [2.0] * 5) for i in range(4)]})
        assert risk_budget(run, RerankPolicy("pessimistic", 0.9), 3) == {"q": 6.0}

    @pytest.mark.parametrize("k", [0, 7])
    def test_k_out_of_range(self, k):
        with pytest.raises(DomainError):
            risk_budget(random_run(0), RerankPolicy(), k)

    @given(st.integers(0, 10_000), st.integers(1, 6), st.floats(0.05, 0.95))
    @settings(max_examples=50, deadline=None)
    def test_bounds_cvar_of_summed_top_k(self, seed, k, alpha):
        run = random_run(seed)
        policy = RerankPolicy("optimistic", alpha)
        ranking = rerank(run, policy)
        budget = risk_budget(run, policy, k)
        for qid in run:
            samples = run.docs(qid)
            summed = sum(samples[d] for d in ranking.doc_ids(qid)[:k])
            assert cvar(summed, alpha, "optimistic") <= budget[qid] + 1e-9
