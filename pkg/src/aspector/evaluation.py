"""Offline metrics: topic-space orthogonality, coverage overlap, clustering F-measure.

Topic similarity uses a latent-semantic model (truncated SVD of the corpus
TF-IDF matrix) so that orthogonality is not judged by the same TF-IDF
vectors that drove selection.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dedup import SimilarityMatrix, cluster
from .retrieval import DEFAULT_M, Corpus, Document, search
from .logmodel import tokenize

DEFAULT_T = 32


class MetricUndefined(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TopicModel:
    corpus: Corpus
    term_vectors: np.ndarray  # (vocabulary, T)
    singular_values: np.ndarray

    @property
    def T(self) -> int:
        return self.term_vectors.shape[1]

    def project_text(self, text: str) -> np.ndarray:
        c = self.corpus
        vec = np.zeros(self.T)
        counts: dict[int, int] = {}
        for t in tokenize(text):
            i = c.vocab.get(t)
            if i is not None:
                counts[i] = counts.get(i, 0) + 1
        for i in sorted(counts):
            vec += (counts[i] * c.idf[i]) * self.term_vectors[i]
        return vec

    def project(self, doc: Document) -> np.ndarray:
        c = self.corpus
        r = c.doc_pos.get(doc.doc_id)
        if r is None or c.documents[r] != doc:
            return self.project_text(doc.text)
        a, b = c.indptr[r], c.indptr[r + 1]
        return c.raw_data[a:b] @ self.term_vectors[c.indices[a:b]]


def build_topic_model(corpus: Corpus, T: int = DEFAULT_T) -> TopicModel:
    """Rank-T latent-semantic model of the head+snippet TF-IDF matrix.

    Term vectors are the leading left singular vectors, found from the
    eigendecomposition of the term co-occurrence Gram matrix. Each vector's
    largest-magnitude entry is made positive so the model is reproducible.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    if corpus.n_docs == 0:
        raise ValueError("cannot build a topic model from an empty corpus")
    V = len(corpus.terms)
    A = np.zeros((V, corpus.n_docs))
    doc_of_nnz = np.repeat(np.arange(corpus.n_docs), np.diff(corpus.indptr))
    A[corpus.indices, doc_of_nnz] = corpus.raw_data
    gram = A @ A.T
    evals, evecs = np.linalg.eigh(gram)
    order = np.argsort(-evals, kind="stable")
    evals, evecs = evals[order], evecs[:, order]
    tol = max(evals[0], 0.0) * max(A.shape) * np.finfo(float).eps if V else 0.0
    rank = int(np.sum(evals > tol))
    k = max(1, min(T, rank))
    U = evecs[:, :k].copy()
    for j in range(k):
        i = int(np.argmax(np.abs(U[:, j])))
        if U[i, j] < 0:
            U[:, j] = -U[:, j]
    U.setflags(write=False)
    sv = np.sqrt(np.clip(evals[:k], 0.0, None))
    return TopicModel(corpus, U, sv)


def _cos(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return min(1.0, max(-1.0, float(u @ v) / (nu * nv)))


def tsim(d1: Document, d2: Document, model: TopicModel) -> float:
    return _cos(model.project(d1), model.project(d2))


def _unit_rows(model: TopicModel, docs) -> np.ndarray:
    if not docs:
        return np.zeros((0, model.T))
    M = np.array([model.project(d) for d in docs])
    norms = np.linalg.norm(M, axis=1)
    out = np.zeros_like(M)
    nz = norms > 0
    out[nz] = M[nz] / norms[nz, None]
    return out


def _mean_cross(U1: np.ndarray, U2: np.ndarray) -> float:
    if len(U1) == 0 or len(U2) == 0:
        return 0.0
    return float(np.clip(U1 @ U2.T, -1.0, 1.0).mean())


def aspect_topic_sim(a1: str, a2: str, corpus: Corpus, model: TopicModel, m: int = DEFAULT_M) -> float:
    """Mean topic similarity over all cross pairs of the two result sets."""
    D1 = [d.doc for d in search(corpus, a1, m).docs]
    D2 = [d.doc for d in search(corpus, a2, m).docs]
    return _mean_cross(_unit_rows(model, D1), _unit_rows(model, D2))


@dataclass(frozen=True)
class NsimResult:
    asim: float
    isim: float
    nsim: float


def nsim(aspects: Sequence[str], corpus: Corpus, model: TopicModel, m: int = DEFAULT_M) -> NsimResult:
    """Average inter-aspect similarity normalized by average self-similarity."""
    n = len(aspects)
    if n < 2:
        raise MetricUndefined("nsim needs at least two aspects")
    units = [_unit_rows(model, [d.doc for d in search(corpus, a, m).docs]) for a in aspects]
    pair_sum = math.fsum(_mean_cross(units[i], units[j]) for i, j in combinations(range(n), 2))
    asim = 2.0 * pair_sum / (n * (n - 1))
    isim = math.fsum(_mean_cross(u, u) for u in units) / n
    if isim == 0.0:
        raise MetricUndefined("intra-aspect similarity is zero")
    return NsimResult(asim, isim, asim / isim)


@dataclass(frozen=True)
class CoverageResult:
    overlap: float
    vacuous: bool
    aspect_docs: tuple[str, ...]
    new_docs: tuple[str, ...]  # aspect documents outside the query's top N


def coverage_overlap(q: str, aspects: Iterable[str], corpus: Corpus, k: int = 1, N: int = 50) -> CoverageResult:
    """Fraction of the aspects' top-k documents already in the query's top N."""
    if k < 1 or N < 1:
        raise ValueError("k and N must be >= 1")
    top_n = set(search(corpus, q, N).doc_ids)
    union = sorted({d for a in aspects for d in search(corpus, a, k).doc_ids})
    if not union:
        return CoverageResult(1.0, True, (), ())
    inside = sum(1 for d in union if d in top_n)
    return CoverageResult(inside / len(union), False, tuple(union), tuple(d for d in union if d not in top_n))


@dataclass(frozen=True)
class GoldClustering:
    query: str
    clusters: tuple[tuple[str, ...], ...]

    @property
    def aspects(self) -> list[str]:
        return [a for c in self.clusters for a in c]

    def __post_init__(self):
        seen = self.aspects
        if len(seen) != len(set(seen)):
            raise ValueError(f"gold clusters for {self.query!r} overlap")


def read_gold(path: str | Path) -> list[GoldClustering]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                out.append(GoldClustering(obj["query"], tuple(tuple(c) for c in obj["clusters"])))
    return out


def write_gold(golds: Iterable[GoldClustering], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for g in golds:
            fh.write(json.dumps({"query": g.query, "clusters": [list(c) for c in g.clusters]}) + "\n")


@dataclass(frozen=True)
class PairScores:
    precision: float
    recall: float
    f: float


def _same_pairs(partition: Sequence[Sequence[str]]) -> set[frozenset[str]]:
    return {frozenset(p) for c in partition for p in combinations(sorted(c), 2)}


def pair_scores(predicted: Sequence[Sequence[str]], gold: GoldClustering | Sequence[Sequence[str]]) -> PairScores:
    """Precision/recall/F over same-cluster decisions for every unordered aspect pair."""
    gold_part = gold.clusters if isinstance(gold, GoldClustering) else gold
    pu = sorted(a for c in predicted for a in c)
    gu = sorted(a for c in gold_part for a in c)
    if pu != gu:
        raise ValueError("predicted and gold partitions cover different aspects")
    pred, true = _same_pairs(predicted), _same_pairs(gold_part)
    if not pred and not true:
        return PairScores(1.0, 1.0, 1.0)
    hit = len(pred & true)
    p = hit / len(pred) if pred else 0.0
    r = hit / len(true) if true else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return PairScores(p, r, f)


def pair_f_measure(predicted, gold) -> float:
    return pair_scores(predicted, gold).f


def sigma_sweep(
    cases: Sequence[tuple[SimilarityMatrix, Mapping[str, float], GoldClustering]],
    sigmas: Sequence[float],
) -> list[tuple[float, float]]:
    """Mean pair F-measure across cases for each threshold."""
    if not sigmas:
        raise ValueError("no sigma values")
    rows = []
    for s in sigmas:
        fs = [pair_f_measure([c.members for c in cluster(mat, scores, s)], gold) for mat, scores, gold in cases]
        rows.append((s, math.fsum(fs) / len(fs) if fs else 0.0))
    return rows


def parse_sigmas(spec: str) -> list[float]:
    """``"0.05:0.55:0.05"`` (inclusive range) or a comma list."""
    if ":" in spec:
        lo, hi, step = (float(x) for x in spec.split(":"))
        if step <= 0:
            raise ValueError("sigma step must be positive")
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [round(lo + i * step, 10) for i in range(n)]
    return [float(x) for x in spec.split(",") if x.strip()]


def format_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """CSV text with fixed six-decimal floats."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.6f}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()
