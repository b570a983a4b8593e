"""Scoring feature files into sample runs, and the sampling-overhead benchmark."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..core import SampleRun
from ..errors import DomainError
from .model import (
    MlpRanker,
    document_rng,
    head_sample,
    init_ranker,
    penultimate_features,
    sample_scores,
    sampling_rng,
    trunk_features,
)
from .synth import FeatureSet


def _group_rows(fs: FeatureSet) -> dict[str, list[int]]:
    groups: dict[str, list[int]] = {}
    seen = set()
    for i, (qid, did) in enumerate(zip(fs.query_ids, fs.doc_ids)):
        if (qid, did) in seen:
            raise DomainError(f"duplicate row for {qid!r}/{did!r}")
        seen.add((qid, did))
        groups.setdefault(qid, []).append(i)
    return groups


def _score_query(model, fs, qid, rows, n, seed, deterministic):
    x = fs.features[rows]
    if deterministic:
        scores = penultimate_features(model, x) @ model.out.weight[:, 0] + model.out.bias[0]
        return [(fs.doc_ids[i], [s]) for i, s in zip(rows, scores)]
    h = trunk_features(model, x)
    out = []
    for i, hi in zip(rows, h):
        rng = document_rng(seed, qid, fs.doc_ids[i])
        out.append((fs.doc_ids[i], head_sample(model, hi[None, :], rng, n)))
    return out


def score_features(
    model: MlpRanker,
    fs: FeatureSet,
    n: int = 150,
    seed: int = 0,
    threads: int = 1,
    deterministic: bool = False,
) -> SampleRun:
    """Sample run with ``n`` scores per document (one mean-network score if deterministic).

    The trunk runs once per query; every document's gates come from its own
    generator, so the output does not depend on ``threads``.
    """
    if n < 1:
        raise DomainError(f"number of samples must be >= 1, got {n}")
    if fs.features.shape[1] != model.input_dim:
        raise DomainError(f"feature dimension {fs.features.shape[1]} does not match model input {model.input_dim}")
    groups = _group_rows(fs)
    work = lambda item: _score_query(model, fs, item[0], item[1], n, seed, deterministic)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scored = list(pool.map(work, groups.items()))
    else:
        scored = [work(item) for item in groups.items()]
    return SampleRun(dict(zip(groups, scored)))


@dataclass(frozen=True)
class BenchRow:
    depth: int
    base_us: float  # per-document time with one sample
    overhead_us: float  # extra per-document time for the additional samples


def _paired_times(model, x, extra, rng) -> tuple[np.ndarray, np.ndarray]:
    clock = time.perf_counter
    base, full = np.empty(x.shape[0]), np.empty(x.shape[0])
    for i, row in enumerate(x):
        t0 = clock()
        sample_scores(model, row, 1, rng)
        t1 = clock()
        sample_scores(model, row, 1 + extra, rng)
        t2 = clock()
        base[i], full[i] = t1 - t0, t2 - t1
    return base, full


def sampling_overhead(
    depths=(2, 8),
    extra: int = 100,
    docs: int = 300,
    input_dim: int = 16,
    hidden_dim: int = 32,
    repeats: int = 5,
    seed: int = 0,
) -> list[BenchRow]:
    """Per-document cost of ``extra`` additional samples for each trunk depth.

    Each document is timed with 1 and then 1 + extra samples back to back;
    the median paired difference over all documents and ``repeats`` rounds
    (which alternate between depths) is robust to scheduler noise.
    """
    x = np.random.default_rng(seed).normal(size=(docs, input_dim))
    rng = sampling_rng(seed)
    models = [init_ranker(input_dim, hidden_dim, depth, seed=seed) for depth in depths]
    base = [[] for _ in models]
    extra_cost = [[] for _ in models]
    for _ in range(repeats):
        for i, model in enumerate(models):
            b, f = _paired_times(model, x, extra, rng)
            base[i].append(b)
            extra_cost[i].append(f - b)
    return [
        BenchRow(d, float(np.median(b)) * 1e6, float(np.median(e)) * 1e6)
        for d, b, e in zip(depths, base, extra_cost)
    ]
