"""Ranking metrics, oracle F1 cutoffs and cutoff-prediction features.

Unjudged documents count as non-relevant. Queries without any relevant
judgment are skipped by nDCG, MAP and the F1 ratio; the per-query helpers
return only the evaluated queries so callers can count the skipped ones.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .core import Qrels, RankedList, SampleRun
from .errors import DomainError
from .stats import describe


def _shared_queries(ranking: RankedList, qrels: Qrels) -> list[str]:
    judged = qrels.query_ids()
    qids = [q for q in ranking if q in judged]
    if not qids:
        raise DomainError("ranking and qrels share no queries")
    return qids


def _require_binary(qrels: Qrels) -> None:
    if not qrels.is_binary():
        raise DomainError("metric needs binary qrels; binarize them first")


def _mean(per_query: Mapping[str, float], what: str) -> float:
    if not per_query:
        raise DomainError(f"{what}: every query was skipped (no relevant judgments)")
    return float(np.mean(list(per_query.values())))


def reciprocal_ranks(ranking: RankedList, qrels: Qrels) -> dict[str, float]:
    _require_binary(qrels)
    out = {}
    for qid in _shared_queries(ranking, qrels):
        out[qid] = 0.0
        for rank, docid in enumerate(ranking.doc_ids(qid), start=1):
            if qrels.grade(qid, docid) > 0:
                out[qid] = 1.0 / rank
                break
    return out


def mrr(ranking: RankedList, qrels: Qrels) -> float:
    return _mean(reciprocal_ranks(ranking, qrels), "MRR")


def dcg(grades, k: int) -> float:
    g = np.asarray(grades, dtype=np.float64)[:k]
    discounts = np.log2(np.arange(2, g.size + 2))
    return float(np.sum((2.0**g - 1.0) / discounts))


def ndcg_per_query(ranking: RankedList, qrels: Qrels, k: int) -> dict[str, float]:
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    by_query = qrels.by_query()
    out = {}
    for qid in _shared_queries(ranking, qrels):
        ideal = dcg(sorted(by_query[qid].values(), reverse=True), k)
        if ideal == 0.0:
            continue
        gains = [qrels.grade(qid, d) for d in ranking.doc_ids(qid)]
        out[qid] = dcg(gains, k) / ideal
    return out


def ndcg_at(ranking: RankedList, qrels: Qrels, k: int) -> float:
    """Mean nDCG@k with gain 2^grade - 1 and log2(rank + 1) discount."""
    return _mean(ndcg_per_query(ranking, qrels, k), f"nDCG@{k}")


def average_precision(ranking: RankedList, qrels: Qrels, qid: str) -> float:
    _require_binary(qrels)
    n_rel = qrels.n_relevant(qid)
    if n_rel == 0:
        raise DomainError(f"query {qid!r} has no relevant judgments")
    hits, total = 0, 0.0
    for rank, docid in enumerate(ranking.doc_ids(qid), start=1):
        if qrels.grade(qid, docid) > 0:
            hits += 1
            total += hits / rank
    return total / n_rel


def ap_per_query(ranking: RankedList, qrels: Qrels) -> dict[str, float]:
    _require_binary(qrels)
    return {
        qid: average_precision(ranking, qrels, qid)
        for qid in _shared_queries(ranking, qrels)
        if qrels.n_relevant(qid) > 0
    }


def map_(ranking: RankedList, qrels: Qrels) -> float:
    return _mean(ap_per_query(ranking, qrels), "MAP")


def _f1(hits: int, k: int, n_rel: int) -> float:
    if hits == 0:
        return 0.0
    precision, recall = hits / k, hits / n_rel
    return 2.0 * precision * recall / (precision + recall)


def f1_curve(ranking: RankedList, qrels: Qrels, qid: str) -> np.ndarray:
    """F1 at every cutoff 1..len(list) for one query."""
    _require_binary(qrels)
    n_rel = qrels.n_relevant(qid)
    rel = np.array([qrels.grade(qid, d) > 0 for d in ranking.doc_ids(qid)])
    if rel.size == 0:
        raise DomainError(f"query {qid!r} has an empty list")
    hits = np.cumsum(rel)
    return np.array([_f1(int(h), k, n_rel) for k, h in enumerate(hits, start=1)])


def f1_at(ranking: RankedList, qrels: Qrels, k: int) -> float:
    """Mean F1 at a fixed cutoff (clipped to each list's length)."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    values = []
    for qid in _shared_queries(ranking, qrels):
        curve = f1_curve(ranking, qrels, qid)
        values.append(curve[min(k, curve.size) - 1])
    return float(np.mean(values))


@dataclass(frozen=True)
class OracleCutoff:
    k: int
    f1: float
    # True when the query has no relevant document, so F1 is 0 at every cutoff.
    degenerate: bool = False


def oracle_cutoff(ranking: RankedList, qrels: Qrels) -> dict[str, OracleCutoff]:
    """F1-maximizing cutoff per query; the smallest k wins ties."""
    out = {}
    for qid in _shared_queries(ranking, qrels):
        curve = f1_curve(ranking, qrels, qid)
        k = int(np.argmax(curve)) + 1
        out[qid] = OracleCutoff(k, float(curve[k - 1]), qrels.n_relevant(qid) == 0)
    return out


def f1_ratio(predicted_k: Mapping[str, int], ranking: RankedList, qrels: Qrels) -> float:
    """Mean over queries of F1 at the predicted cutoff divided by the oracle F1."""
    oracle = oracle_cutoff(ranking, qrels)
    ratios = {}
    for qid, best in oracle.items():
        if best.f1 == 0.0:
            continue
        if qid not in predicted_k:
            raise DomainError(f"no predicted cutoff for query {qid!r}")
        curve = f1_curve(ranking, qrels, qid)
        k = predicted_k[qid]
        if not 1 <= k <= curve.size:
            raise DomainError(f"predicted cutoff {k} out of range for query {qid!r}")
        ratios[qid] = curve[k - 1] / best.f1
    return _mean(ratios, "F1 ratio")


@dataclass(frozen=True)
class CutoffRow:
    query_id: str
    doc_id: str
    rank: int
    mean: float
    std: float
    skew: float
    entropy: float


def cutoff_features(run: SampleRun, ranking: RankedList) -> list[CutoffRow]:
    """<mean, std, skew, entropy> per document, in ranking order."""
    rows = []
    for qid, docs in ranking.queries.items():
        if qid not in run.queries:
            raise DomainError(f"query {qid!r} missing from the sample run")
        samples = run.docs(qid)
        for rank, (docid, _) in enumerate(docs, start=1):
            if docid not in samples:
                raise DomainError(f"no samples for document {docid!r} of query {qid!r}")
            st = describe(samples[docid])
            rows.append(CutoffRow(qid, docid, rank, st.mean, math.sqrt(st.variance), st.skew, st.entropy))
    return rows
