"""Domain types and text formats: qrels, sample runs and ranked lists.

A *sample run* stores N score draws per (query, document)::

    qid <TAB> docid <TAB> s_1 <TAB> ... <TAB> s_N

A deterministic run is the N=1 case. Ranked lists are written in the
six-column TREC run format ``qid Q0 docid rank score tag``.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from .errors import DomainError, FormatError, ParseError

log = logging.getLogger(__name__)

Text = str | bytes


def _lines(text: Text) -> Iterator[tuple[int, str]]:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip():
            yield lineno, line


def format_score(value: float) -> str:
    # 17 significant digits round-trip every finite double exactly.
    return f"{value:.17g}"


@dataclass(frozen=True)
class Qrels:
    """Graded judgments keyed by ``(query_id, doc_id)``."""

    entries: Mapping[tuple[str, str], int]

    def __post_init__(self):
        for key, grade in self.entries.items():
            if grade < 0:
                raise DomainError(f"negative grade {grade} for {key}")
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, Qrels) and dict(self.entries) == dict(other.entries)

    def __hash__(self):
        return hash(frozenset(self.entries.items()))

    def grade(self, qid: str, docid: str) -> int:
        """Grade of a document; unjudged documents count as 0."""
        return self.entries.get((qid, docid), 0)

    def is_judged(self, qid: str, docid: str) -> bool:
        return (qid, docid) in self.entries

    def by_query(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {}
        for (qid, docid), grade in self.entries.items():
            out.setdefault(qid, {})[docid] = grade
        return out

    def query_ids(self) -> set[str]:
        return {qid for qid, _ in self.entries}

    def n_relevant(self, qid: str) -> int:
        return sum(1 for (q, _), g in self.entries.items() if q == qid and g > 0)

    def is_binary(self) -> bool:
        return all(g in (0, 1) for g in self.entries.values())


@dataclass(frozen=True)
class SampleRun:
    """Per-query ordered ``(doc_id, samples)`` lists; N is shared within a query."""

    queries: Mapping[str, tuple[tuple[str, np.ndarray], ...]] = field(default_factory=dict)

    def __post_init__(self):
        frozen = {}
        for qid, docs in self.queries.items():
            seen: set[str] = set()
            n = None
            entries = []
            for docid, samples in docs:
                if docid in seen:
                    raise DomainError(f"duplicate document {docid!r} in query {qid!r}")
                seen.add(docid)
                arr = np.array(samples, dtype=np.float64).reshape(-1)
                if arr.size == 0:
                    raise DomainError(f"no samples for {qid!r}/{docid!r}")
                if not np.all(np.isfinite(arr)):
                    raise DomainError(f"non-finite score for {qid!r}/{docid!r}")
                if n is None:
                    n = arr.size
                elif arr.size != n:
                    raise FormatError(f"inconsistent sample count for {qid}")
                arr.flags.writeable = False
                entries.append((docid, arr))
            frozen[qid] = tuple(entries)
        object.__setattr__(self, "queries", MappingProxyType(frozen))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SampleRun) or list(self.queries) != list(other.queries):
            return False
        for qid, docs in self.queries.items():
            theirs = other.queries[qid]
            if len(docs) != len(theirs):
                return False
            for (d1, s1), (d2, s2) in zip(docs, theirs):
                if d1 != d2 or s1.shape != s2.shape or not np.array_equal(s1, s2):
                    return False
        return True

    __hash__ = None

    def __iter__(self) -> Iterator[str]:
        return iter(self.queries)

    def n_samples(self, qid: str) -> int:
        return self.queries[qid][0][1].size

    def docs(self, qid: str) -> dict[str, np.ndarray]:
        return dict(self.queries[qid])

    def map_scores(self, fn) -> dict[str, dict[str, float]]:
        """Apply ``fn(samples) -> float`` to every document."""
        return {qid: {d: float(fn(s)) for d, s in docs} for qid, docs in self.queries.items()}


def _rank_key(item: tuple[str, float]):
    return (-item[1], item[0])


@dataclass(frozen=True)
class RankedList:
    """Per-query ``(doc_id, score)`` lists sorted by score desc, doc id asc."""

    queries: Mapping[str, tuple[tuple[str, float], ...]]

    def __post_init__(self):
        frozen = {}
        for qid, docs in self.queries.items():
            ordered = tuple((str(d), float(s)) for d, s in docs)
            keys = [_rank_key(x) for x in ordered]
            if any(a >= b for a, b in zip(keys, keys[1:])):
                raise DomainError(f"query {qid!r} is not strictly sorted by (score desc, doc id asc)")
            frozen[qid] = ordered
        object.__setattr__(self, "queries", MappingProxyType(frozen))

    @classmethod
    def from_scores(cls, scores: Mapping[str, Mapping[str, float]]) -> "RankedList":
        return cls({qid: sorted(docs.items(), key=_rank_key) for qid, docs in scores.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, RankedList) and dict(self.queries) == dict(other.queries)

    __hash__ = None

    def __iter__(self) -> Iterator[str]:
        return iter(self.queries)

    def doc_ids(self, qid: str) -> list[str]:
        return [d for d, _ in self.queries[qid]]


def mean_ranking(run: SampleRun) -> RankedList:
    return RankedList.from_scores(run.map_scores(np.mean))


def parse_qrels(text: Text) -> tuple[Qrels, int]:
    """Parse TREC qrels; returns the judgments and the number of overwritten duplicates."""
    entries: dict[tuple[str, str], int] = {}
    duplicates = 0
    for lineno, line in _lines(text):
        fields = line.split()
        if len(fields) != 4:
            raise ParseError(f"expected 4 fields, got {len(fields)}", lineno)
        qid, _, docid, grade_s = fields
        try:
            grade = int(grade_s)
        except ValueError:
            raise ParseError(f"non-integer grade {grade_s!r}", lineno) from None
        if grade < 0:
            raise ParseError(f"negative grade {grade}", lineno)
        if (qid, docid) in entries:
            duplicates += 1
        entries[(qid, docid)] = grade
    if duplicates:
        log.warning("qrels: %d duplicate judgments, last occurrence kept", duplicates)
    return Qrels(entries), duplicates


def write_qrels(qrels: Qrels) -> str:
    return "".join(f"{q} 0 {d} {g}\n" for (q, d), g in qrels.entries.items())


def binarize(qrels: Qrels, threshold: int) -> Qrels:
    if threshold < 1:
        raise DomainError(f"binarize threshold must be >= 1, got {threshold}")
    return Qrels({k: int(g >= threshold) for k, g in qrels.entries.items()})


def parse_sample_run(text: Text) -> SampleRun:
    queries: dict[str, list[tuple[str, np.ndarray]]] = {}
    counts: dict[str, int] = {}
    for lineno, line in _lines(text):
        fields = line.rstrip("\r\n").split("\t")
        if len(fields) < 3:
            raise ParseError("expected qid, docid and at least one score", lineno)
        qid, docid, *raw = fields
        try:
            values = [float(v) for v in raw]
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if not all(math.isfinite(v) for v in values):
            raise ParseError(f"non-finite score for {qid}/{docid}", lineno)
        if counts.setdefault(qid, len(values)) != len(values):
            raise FormatError(f"inconsistent sample count for {qid} (line {lineno})")
        queries.setdefault(qid, []).append((docid, np.array(values)))
    return SampleRun(queries)


def write_sample_run(run: SampleRun) -> str:
    lines = []
    for qid, docs in run.queries.items():
        for docid, samples in docs:
            lines.append("\t".join([qid, docid, *map(format_score, samples)]) + "\n")
    return "".join(lines)


def sample_run_from_scores(scores: Mapping[str, Mapping[str, float]]) -> SampleRun:
    """Deterministic (N=1) run from a score map, preserving insertion order."""
    return SampleRun({q: [(d, [s]) for d, s in docs.items()] for q, docs in scores.items()})


def parse_trec_run(text: Text) -> RankedList:
    """Read a six-column TREC run; order is re-derived from the scores."""
    scores: dict[str, dict[str, float]] = {}
    for lineno, line in _lines(text):
        fields = line.split()
        if len(fields) != 6:
            raise ParseError(f"expected 6 fields, got {len(fields)}", lineno)
        qid, _, docid, _, score_s, _ = fields
        try:
            score = float(score_s)
        except ValueError:
            raise ParseError(f"bad score {score_s!r}", lineno) from None
        if docid in scores.setdefault(qid, {}):
            raise ParseError(f"duplicate document {docid!r} in query {qid!r}", lineno)
        scores[qid][docid] = score
    return RankedList.from_scores(scores)


def write_trec_run(ranking: RankedList, tag: str = "riskrank") -> str:
    lines = []
    for qid, docs in ranking.queries.items():
        for rank, (docid, score) in enumerate(docs, start=1):
            lines.append(f"{qid} Q0 {docid} {rank} {format_score(score)} {tag}\n")
    return "".join(lines)


def looks_like_trec_run(text: Text) -> bool:
    for _, line in _lines(text):
        fields = line.split()
        return len(fields) == 6 and fields[1] == "Q0" and "\t" not in line.strip()
    return False

