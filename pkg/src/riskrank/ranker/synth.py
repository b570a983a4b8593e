"""Seeded synthetic ranking corpus with heteroscedastic noise and a shifted split.

Each query q and document d is a standard normal vector; the (query,
document) feature vector is ``q * (d + e)`` elementwise, where the feature
noise ``e`` grows as the true relevance falls. True relevance is the scaled
inner product <q, d> / sqrt(dim) plus label noise, cut into grades 0..3.
The shifted split adds the same unit vector, scaled by ``shift``, to every
evaluation document before the features are formed.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..core import Qrels
from ..errors import DomainError, ParseError

GRADE_THRESHOLDS = (0.8, 1.4, 2.0)


@dataclass(frozen=True)
class SynthConfig:
    dim: int = 16
    n_queries: int = 200
    docs_per_query: int = 100
    train_queries: int = 200
    pairs_per_query: int = 50
    # Standard deviation of the label noise added to the inner product.
    noise: float = 0.3
    # Feature noise scale for a document of average relevance.
    feature_noise: float = 1.0
    # Extra feature noise per unit of softplus(-relevance).
    hetero: float = 4.0
    # Length of the shift vector applied to the shifted split.
    shift: float = 8.0
    seed: int = 0

    def __post_init__(self):
        sizes = ("dim", "n_queries", "docs_per_query", "train_queries", "pairs_per_query")
        for name in sizes:
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be a positive integer")
        if self.docs_per_query < 2:
            raise DomainError("docs_per_query must be at least 2")
        for name in ("noise", "feature_noise", "hetero", "shift"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class FeatureSet:
    """Feature rows of one split with their (query, document) ids."""

    query_ids: tuple[str, ...]
    doc_ids: tuple[str, ...]
    features: np.ndarray  # (rows, dim)

    def __len__(self) -> int:
        return len(self.query_ids)


@dataclass(frozen=True)
class SynthDataset:
    x_pos: np.ndarray  # (pairs, dim) relevant member of each training pair
    x_neg: np.ndarray  # (pairs, dim) non-relevant member
    eval: FeatureSet
    shifted: FeatureSet
    qrels: Qrels  # graded, shared by both evaluation splits
    inner_products: np.ndarray  # (rows,) noiseless relevance of the evaluation rows


def _documents(rng: np.random.Generator, queries: np.ndarray, config: SynthConfig):
    n = queries.shape[0]
    clean = rng.normal(size=(n, config.docs_per_query, config.dim))
    ip = np.einsum("qk,qnk->qn", queries, clean) / np.sqrt(config.dim)
    scale = config.feature_noise * (1.0 + config.hetero * np.logaddexp(0.0, -ip))
    noisy = clean + scale[..., None] * rng.normal(size=clean.shape)
    relevance = ip + config.noise * rng.normal(size=ip.shape)
    grades = np.digitize(relevance, GRADE_THRESHOLDS)
    return noisy, ip, grades


def _training_pairs(rng: np.random.Generator, config: SynthConfig):
    queries = rng.normal(size=(config.train_queries, config.dim))
    docs, _, grades = _documents(rng, queries, config)
    features = queries[:, None, :] * docs
    pos, neg = [], []
    for q in range(config.train_queries):
        rel = np.flatnonzero(grades[q] > 0)
        non = np.flatnonzero(grades[q] == 0)
        if rel.size == 0 or non.size == 0:
            continue
        pos.append(features[q, rng.choice(rel, config.pairs_per_query)])
        neg.append(features[q, rng.choice(non, config.pairs_per_query)])
    if not pos:
        raise DomainError("no training query has both relevant and non-relevant documents")
    return np.concatenate(pos), np.concatenate(neg)


def synth_dataset(config: SynthConfig) -> SynthDataset:
    rng = np.random.default_rng(config.seed)
    x_pos, x_neg = _training_pairs(rng, config)

    queries = rng.normal(size=(config.n_queries, config.dim))
    docs, ip, grades = _documents(rng, queries, config)
    direction = rng.normal(size=config.dim)
    direction /= np.linalg.norm(direction)

    nq, nd = config.n_queries, config.docs_per_query
    qids = tuple(f"q{i}" for i in range(nq) for _ in range(nd))
    dids = tuple(f"d{j}" for _ in range(nq) for j in range(nd))
    flat = lambda a: a.reshape(nq * nd, config.dim)
    eval_x = flat(queries[:, None, :] * docs)
    shifted_x = flat(queries[:, None, :] * (docs + config.shift * direction))
    judgments = {(q, d): int(g) for q, d, g in zip(qids, dids, grades.reshape(-1))}
    return SynthDataset(
        x_pos,
        x_neg,
        FeatureSet(qids, dids, eval_x),
        FeatureSet(qids, dids, shifted_x),
        Qrels(judgments),
        ip.reshape(-1),
    )


# --- feature files -----------------------------------------------------------
#
# Evaluation features: qid <TAB> docid <TAB> x_1 ... x_d
# Training pairs:      pair index <TAB> x+_1 ... x+_d <TAB> x-_1 ... x-_d


def write_features(fs: FeatureSet) -> str:
    lines = []
    for qid, did, row in zip(fs.query_ids, fs.doc_ids, fs.features):
        lines.append("\t".join([qid, did, *(f"{v:.17g}" for v in row)]))
    return "\n".join(lines) + "\n"


def parse_features(text: str) -> FeatureSet:
    qids, dids, rows = [], [], []
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) < 3:
            raise ParseError("expected qid, docid and at least one feature", n)
        try:
            rows.append([float(v) for v in parts[2:]])
        except ValueError as exc:
            raise ParseError(str(exc), n) from None
        if len(rows[-1]) != len(rows[0]):
            raise ParseError(f"expected {len(rows[0])} features, got {len(rows[-1])}", n)
        qids.append(parts[0])
        dids.append(parts[1])
    if not rows:
        raise DomainError("feature file is empty")
    x = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise DomainError("feature file contains non-finite values")
    return FeatureSet(tuple(qids), tuple(dids), x)


def write_pairs(x_pos: np.ndarray, x_neg: np.ndarray) -> str:
    lines = []
    for i, (a, b) in enumerate(zip(x_pos, x_neg)):
        lines.append("\t".join([str(i), *(f"{v:.17g}" for v in a), *(f"{v:.17g}" for v in b)]))
    return "\n".join(lines) + "\n"


def parse_pairs(text: str) -> tuple[np.ndarray, np.ndarray]:
    rows = []
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")[1:]
        if len(parts) < 2 or len(parts) % 2:
            raise ParseError("a pair row needs an even, non-zero number of features", n)
        try:
            rows.append([float(v) for v in parts])
        except ValueError as exc:
            raise ParseError(str(exc), n) from None
        if len(rows[-1]) != len(rows[0]):
            raise ParseError("pair rows differ in width", n)
    if not rows:
        raise DomainError("pair file is empty")
    x = np.array(rows, dtype=np.float64)
    half = x.shape[1] // 2
    return x[:, :half].copy(), x[:, half:].copy()
