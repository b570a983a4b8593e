"""Expected calibration error and its ranking variant over document pairs.

ERCE bins same-query (relevant, non-relevant) document pairs by the
model's probability that the first document outranks the second and
compares that confidence with how often the first document is the
relevant one, using equal-mass (adaptive) bins.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .core import Qrels, RankedList, SampleRun
from .errors import DomainError

DEFAULT_BINS = 10
DEFAULT_PAIR_CAP = 1_000_000


@dataclass(frozen=True)
class RankedPair:
    query_id: str
    doc_i: str
    doc_j: str
    p: float
    label: int


@dataclass(frozen=True)
class CalibrationBin:
    lower: float
    upper: float
    count: int
    confidence: float
    accuracy: float

    @property
    def gap(self) -> float:
        return abs(self.accuracy - self.confidence)


@dataclass(frozen=True)
class CalibrationReport:
    value: float
    bins: tuple[CalibrationBin, ...]

    @property
    def n(self) -> int:
        return sum(b.count for b in self.bins)


def pair_prob_samples(a, b) -> float:
    """P(A > B) over all cross-sample comparisons, ties counted as half."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.size == 0 or b.size == 0:
        raise DomainError("pair_prob_samples needs non-empty sample sets")
    bs = np.sort(b)
    below = np.searchsorted(bs, a, side="left")
    not_above = np.searchsorted(bs, a, side="right")
    wins = int(below.sum())
    ties = int((not_above - below).sum())
    losses = a.size * b.size - wins - ties
    # Doubled counts keep the half-credit numerators integral; the larger
    # side is computed as 1 - smaller so p(a, b) + p(b, a) == 1 exactly.
    win_num, loss_num = 2 * wins + ties, 2 * losses + ties
    denom = 2.0 * a.size * b.size
    if win_num <= loss_num:
        return win_num / denom
    return 1.0 - loss_num / denom


def _logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def pair_prob_softmax(s_i: float, s_j: float) -> float:
    """Two-way softmax exp(s_i) / (exp(s_i) + exp(s_j))."""
    d = float(s_i) - float(s_j)
    if d <= 0:
        return _logistic(d)
    return 1.0 - _logistic(-d)


def _ordered_docs(run: SampleRun | RankedList, qid: str):
    if isinstance(run, SampleRun):
        return list(run.queries[qid])
    return [(d, np.array([s])) for d, s in run.queries[qid]]


def build_pairs(
    run: SampleRun | RankedList,
    qrels: Qrels,
    cap: int = DEFAULT_PAIR_CAP,
    seed: int = 0,
) -> list[RankedPair]:
    """All judged (relevant, non-relevant) pairs per query.

    ``doc_i`` is whichever document comes first in the run's list order and
    the label is 1 iff ``doc_i`` is the relevant one: for binary relevance,
    placing a relevant document above a non-relevant one always raises AP.
    ``p`` uses cross-sample comparison when the query has N > 1 samples and
    the pairwise softmax of the single scores otherwise.
    """
    if not qrels.is_binary():
        raise DomainError("build_pairs needs binary qrels; binarize them first")
    if cap < 1:
        raise DomainError(f"pair cap must be positive, got {cap}")
    pairs: list[RankedPair] = []
    for qid in run:
        docs = [(d, s) for d, s in _ordered_docs(run, qid) if qrels.is_judged(qid, d)]
        stochastic = bool(docs) and docs[0][1].size > 1
        for i, (di, si) in enumerate(docs):
            gi = qrels.grade(qid, di)
            for dj, sj in docs[i + 1 :]:
                gj = qrels.grade(qid, dj)
                if gi == gj:
                    continue
                p = pair_prob_samples(si, sj) if stochastic else pair_prob_softmax(si[0], sj[0])
                pairs.append(RankedPair(qid, di, dj, p, int(gi > gj)))
    if not pairs:
        raise DomainError("no (relevant, non-relevant) judged pairs in the run")
    if len(pairs) > cap:
        keep = np.sort(np.random.default_rng(seed).choice(len(pairs), size=cap, replace=False))
        pairs = [pairs[k] for k in keep]
    return pairs


def adaptive_bins(values: Sequence[float], m: int = DEFAULT_BINS) -> np.ndarray:
    """Inclusive upper edges of up to ``m`` equally filled buckets.

    Sorted values are split into ``m`` runs whose sizes differ by at most one
    (earlier runs take the extra element); each run's maximum is an edge.
    Equal edges merge, so heavy ties yield fewer buckets. A value belongs to
    the first bucket whose edge is >= the value, which sends boundary ties to
    the lower bucket.
    """
    if m < 1:
        raise DomainError(f"number of bins must be >= 1, got {m}")
    v = np.sort(np.asarray(values, dtype=np.float64).reshape(-1))
    if v.size == 0:
        raise DomainError("adaptive_bins needs at least one value")
    edges = [chunk[-1] for chunk in np.array_split(v, min(m, v.size)) if chunk.size]
    return np.unique(edges)


def assign_bins(values: Sequence[float], edges: np.ndarray) -> np.ndarray:
    return np.searchsorted(edges, np.asarray(values, dtype=np.float64), side="left")


def _binned_report(conf: np.ndarray, hits: np.ndarray, m: int) -> CalibrationReport:
    if conf.size == 0:
        raise DomainError("calibration needs at least one prediction")
    if np.any((conf < 0) | (conf > 1)):
        raise DomainError("confidences must lie in [0, 1]")
    edges = adaptive_bins(conf, m)
    idx = assign_bins(conf, edges)
    n = conf.size
    bins = []
    value = 0.0
    for b in range(edges.size):
        mask = idx == b
        count = int(mask.sum())
        if count == 0:
            continue
        c, a = float(conf[mask].mean()), float(hits[mask].mean())
        bins.append(CalibrationBin(float(conf[mask].min()), float(conf[mask].max()), count, c, a))
        value += count / n * abs(a - c)
    return CalibrationReport(value, tuple(bins))


def erce(pairs: Sequence[RankedPair], m: int = DEFAULT_BINS) -> CalibrationReport:
    conf = np.array([pr.p for pr in pairs], dtype=np.float64)
    labels = np.array([pr.label for pr in pairs], dtype=np.float64)
    return _binned_report(conf, labels, m)


def ece(predictions: Sequence[tuple[float, int]], m: int = DEFAULT_BINS) -> CalibrationReport:
    """ECE of ``(confidence, correct)`` predictions under adaptive binning."""
    if len(predictions) == 0:
        raise DomainError("ece needs at least one prediction")
    conf = np.array([p for p, _ in predictions], dtype=np.float64)
    hits = np.array([c for _, c in predictions], dtype=np.float64)
    return _binned_report(conf, hits, m)


def pointwise_predictions(run: SampleRun, qrels: Qrels) -> list[tuple[float, int]]:
    """Per-document relevance predictions for ECE.

    P(relevant) is the MC average of logistic(score) over the samples (a
    single logistic for N=1); the predicted class is the likelier one and
    its probability is the confidence.
    """
    out = []
    for qid, docs in run.queries.items():
        for docid, samples in docs:
            if not qrels.is_judged(qid, docid):
                continue
            # Both class masses from exact sums, so mathematically equal
            # confidences (mirrored or cancelling scores) are equal floats.
            rel = math.fsum(pair_prob_softmax(s, 0.0) for s in samples)
            non = math.fsum(pair_prob_softmax(0.0, s) for s in samples)
            predicted = int(rel >= non)
            out.append((max(rel, non) / len(samples), int(predicted == qrels.grade(qid, docid))))
    if not out:
        raise DomainError("no judged documents in the run")
    return out
