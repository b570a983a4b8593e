"""Risk-aware reranking of sample runs by per-document CVaR."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import RankedList, SampleRun
from .errors import DomainError
from .stats import Direction, cvar

DEFAULT_ALPHA = 0.9


@dataclass(frozen=True)
class RerankPolicy:
    direction: Direction = Direction.MEAN
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction.parse(self.direction))
        if self.direction is not Direction.MEAN and not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie strictly inside (0, 1), got {self.alpha}")

    def score(self, samples) -> float:
        return cvar(samples, self.alpha, self.direction)


def _score_query(run: SampleRun, qid: str, policy: RerankPolicy) -> dict[str, float]:
    docs = run.queries[qid]
    if not docs:
        raise DomainError(f"query {qid!r} has no documents")
    return {docid: policy.score(samples) for docid, samples in docs}


def rerank(run: SampleRun, policy: RerankPolicy, threads: int = 1) -> RankedList:
    qids = list(run.queries)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scored = list(pool.map(lambda q: _score_query(run, q, policy), qids))
    else:
        scored = [_score_query(run, q, policy) for q in qids]
    return RankedList.from_scores(dict(zip(qids, scored)))


def risk_budget(run: SampleRun, policy: RerankPolicy, k: int) -> dict[str, float]:
    """Sum of the top-k documents' CVaR per query.

    By sub-additivity this upper-bounds the CVaR of the summed top-k scores.
    """
    ranking = rerank(run, policy)
    out = {}
    for qid, docs in ranking.queries.items():
        if not 1 <= k <= len(docs):
            raise DomainError(f"k={k} out of range for query {qid!r} with {len(docs)} documents")
        out[qid] = float(np.sum([score for _, score in docs[:k]]))
    return out
