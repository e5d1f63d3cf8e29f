"""Local TF-IDF search engine and result-set similarity.

Only head and snippet text is indexed. Weights are raw term counts times
``ln(N / df)``; document vectors are stored unit-normalized in CSR form so a
cosine is a single sparse dot product.
"""

from __future__ import annotations

import json
import math
import threading
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .logmodel import tokenize

DEFAULT_M = 8


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class Document:
    doc_id: str
    head: str
    snippet: str
    body: str | None = None
    url: str | None = None

    @property
    def text(self) -> str:
        return f"{self.head} {self.snippet}"

    def to_json(self) -> dict:
        d = {"doc_id": self.doc_id, "head": self.head, "snippet": self.snippet}
        if self.body is not None:
            d["body"] = self.body
        if self.url is not None:
            d["url"] = self.url
        return d


@dataclass(frozen=True)
class ScoredDoc:
    doc: Document
    score: float


@dataclass(frozen=True)
class RetrievalResult:
    query: str
    docs: tuple[ScoredDoc, ...]

    @property
    def doc_ids(self) -> list[str]:
        return [d.doc.doc_id for d in self.docs]

    def __len__(self):
        return len(self.docs)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class Corpus:
    """An indexed, immutable document collection.

    ``cache`` optionally pins search results: ``{query: [doc_id, ...]}``.
    """

    def __init__(self, documents: Sequence[Document], cache: dict[str, list[str]] | None = None):
        self.documents = tuple(documents)
        self.doc_pos: dict[str, int] = {}
        for i, d in enumerate(self.documents):
            if d.doc_id in self.doc_pos:
                raise CorpusError(f"duplicate doc_id {d.doc_id!r}")
            self.doc_pos[d.doc_id] = i
        self.cache = dict(cache or {})
        for q, ids in self.cache.items():
            missing = [i for i in ids if i not in self.doc_pos]
            if missing:
                raise CorpusError(f"retrieval cache for {q!r} names unknown documents {missing}")

        counts = [Counter(tokenize(d.text)) for d in self.documents]
        df = Counter()
        for c in counts:
            df.update(c.keys())
        terms = sorted(df)
        self.vocab = {t: i for i, t in enumerate(terms)}
        self.terms = tuple(terms)
        n = len(self.documents)
        self.df = _frozen(np.array([df[t] for t in terms], dtype=np.int64))
        self.idf = _frozen(np.array([math.log(n / df[t]) for t in terms], dtype=np.float64))

        indptr = [0]
        indices: list[int] = []
        raw: list[float] = []
        unit: list[float] = []
        idf = self.idf.tolist()
        for c in counts:
            ids = sorted(self.vocab[t] for t in c)
            row = [(i, c[self.terms[i]] * idf[i]) for i in ids]
            row = [(i, w) for i, w in row if w != 0.0]
            norm = math.sqrt(math.fsum(w * w for _, w in row))
            for i, w in row:
                indices.append(i)
                raw.append(w)
                unit.append(w / norm)
            indptr.append(len(indices))
        self.indptr = _frozen(np.array(indptr, dtype=np.int64))
        self.indices = _frozen(np.array(indices, dtype=np.int32))
        self.raw_data = _frozen(np.array(raw, dtype=np.float64))
        self.data = _frozen(np.array(unit, dtype=np.float64))

        # inverted index over the unit-normalized weights
        order = np.lexsort((np.repeat(np.arange(n), np.diff(self.indptr)), self.indices))
        self.post_docs = _frozen(np.repeat(np.arange(n, dtype=np.int32), np.diff(self.indptr))[order])
        self.post_weights = _frozen(self.data[order])
        self.post_indptr = _frozen(
            np.concatenate([[0], np.cumsum(np.bincount(self.indices, minlength=len(terms)))]).astype(np.int64)
        )
        self._memo: dict[tuple[str, int], RetrievalResult] = {}
        self._lock = threading.Lock()

    @property
    def n_docs(self) -> int:
        return len(self.documents)

    def term_stats(self) -> dict[str, int]:
        return dict(zip(self.terms, self.df.tolist()))

    def row(self, doc: Document | str) -> int:
        key = doc if isinstance(doc, str) else doc.doc_id
        return self.doc_pos[key]

    def vectorize(self, text: str) -> tuple[np.ndarray, np.ndarray]:
        """Unit-normalized TF-IDF vector of arbitrary text against corpus statistics."""
        c = Counter(t for t in tokenize(text) if t in self.vocab)
        ids = sorted(self.vocab[t] for t in c)
        pairs = [(i, c[self.terms[i]] * float(self.idf[i])) for i in ids]
        pairs = [(i, w) for i, w in pairs if w != 0.0]
        if not pairs:
            return np.zeros(0, np.int32), np.zeros(0, np.float64)
        norm = math.sqrt(math.fsum(w * w for _, w in pairs))
        return (
            np.array([i for i, _ in pairs], dtype=np.int32),
            np.array([w / norm for _, w in pairs], dtype=np.float64),
        )

    def doc_vector(self, doc: Document) -> tuple[np.ndarray, np.ndarray]:
        r = self.doc_pos.get(doc.doc_id)
        if r is None or self.documents[r] != doc:
            return self.vectorize(doc.text)
        a, b = self.indptr[r], self.indptr[r + 1]
        return self.indices[a:b], self.data[a:b]


def index(documents: Iterable[Document], cache: dict[str, list[str]] | None = None) -> Corpus:
    return Corpus(list(documents), cache)


def read_corpus(path: str | Path) -> list[Document]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                docs.append(Document(
                    str(obj["doc_id"]), obj["head"], obj["snippet"], obj.get("body"), obj.get("url"),
                ))
            except (KeyError, json.JSONDecodeError) as exc:
                raise CorpusError(f"{path}:{lineno}: bad corpus record ({exc})") from exc
    return docs


def write_corpus(docs: Iterable[Document], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for d in docs:
            fh.write(json.dumps(d.to_json(), sort_keys=True) + "\n")


def read_cache(path: str | Path) -> dict[str, list[str]]:
    cache = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                cache[obj["query"]] = [str(d) for d in obj["doc_ids"]]
    return cache


def write_cache(results: Iterable[RetrievalResult], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in results:
            fh.write(json.dumps({"query": r.query, "doc_ids": r.doc_ids}) + "\n")


def _scores(corpus: Corpus, query: str) -> np.ndarray:
    q_idx, q_w = corpus.vectorize(query)
    if corpus.n_docs == 0:
        return np.zeros(0)
    return kernels.accumulate_scores(
        q_idx, q_w, corpus.post_indptr, corpus.post_docs, corpus.post_weights, corpus.n_docs
    )


def search(corpus: Corpus, query: str, m: int = DEFAULT_M) -> RetrievalResult:
    """Top-``m`` documents by TF-IDF cosine; zero-score documents never match."""
    if m < 1:
        raise ValueError("m must be >= 1")
    key = (query, m)
    hit = corpus._memo.get(key)
    if hit is not None:
        return hit
    scores = _scores(corpus, query)
    if query in corpus.cache:
        rows = [corpus.doc_pos[d] for d in corpus.cache[query][:m]]
    else:
        nz = np.flatnonzero(scores > 0.0).tolist()
        nz.sort(key=lambda r: (-scores[r], corpus.documents[r].doc_id))
        rows = nz[:m]
    result = RetrievalResult(
        query, tuple(ScoredDoc(corpus.documents[r], float(scores[r])) for r in rows)
    )
    with corpus._lock:
        corpus._memo.setdefault(key, result)
    return result


def dsim(d1: Document, d2: Document, corpus: Corpus) -> float:
    """TF-IDF cosine between two documents' head+snippet text, clamped to [0, 1]."""
    ai, av = corpus.doc_vector(d1)
    bi, bv = corpus.doc_vector(d2)
    return min(1.0, max(0.0, kernels.sparse_dot(ai, av, bi, bv)))


def result_set_similarities(corpus: Corpus, results: Sequence[RetrievalResult]) -> np.ndarray:
    """Pairwise max-match similarity between retrieved document sets.

    The document Gram matrix is computed once over the union of all sets,
    then each set pair averages its best matches in both directions.
    """
    rows = sorted({corpus.row(d.doc) for r in results for d in r.docs})
    pos = {r: i for i, r in enumerate(rows)}
    set_indptr = [0]
    members: list[int] = []
    for r in results:
        members.extend(pos[corpus.row(d.doc)] for d in r.docs)
        set_indptr.append(len(members))
    gram = kernels.row_gram(np.array(rows, dtype=np.int64), corpus.indptr, corpus.indices, corpus.data)
    np.minimum(gram, 1.0, out=gram)
    sims = kernels.set_similarity_matrix(
        gram, np.array(set_indptr, dtype=np.int64), np.array(members, dtype=np.int64)
    )
    np.minimum(sims, 1.0, out=sims)
    return sims


def _concat_sim(corpus: Corpus, ri: RetrievalResult, rj: RetrievalResult) -> float:
    def summed(r):
        acc: dict[int, float] = {}
        for d in r.docs:
            row = corpus.row(d.doc)
            a, b = corpus.indptr[row], corpus.indptr[row + 1]
            for t, w in zip(corpus.indices[a:b].tolist(), corpus.raw_data[a:b].tolist()):
                acc[t] = acc.get(t, 0.0) + w
        return acc

    u, v = summed(ri), summed(rj)
    nu = math.sqrt(math.fsum(w * w for w in u.values()))
    nv = math.sqrt(math.fsum(w * w for w in v.values()))
    if nu == 0 or nv == 0:
        return 0.0
    dot = math.fsum(u[t] * v[t] for t in sorted(u.keys() & v.keys()))
    return min(1.0, max(0.0, dot / (nu * nv)))


def aspect_sim(a_i: str, a_j: str, corpus: Corpus, m: int = DEFAULT_M, concat: bool = False) -> float:
    """Similarity of two aspects through their top-``m`` result sets.

    With ``concat=True`` each result set is merged into one pseudo-document
    instead; coarser, kept only for comparison.
    """
    ri, rj = search(corpus, a_i, m), search(corpus, a_j, m)
    if not ri.docs or not rj.docs:
        return 0.0
    if concat:
        return _concat_sim(corpus, ri, rj)
    return float(result_set_similarities(corpus, [ri, rj])[0, 1])
