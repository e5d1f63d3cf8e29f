"""Compare the compiled and pure-Python kernels on a synthetic corpus.

    python benchmarks/bench_kernels.py [--seed 0] [--repeat 5]

Each kernel is timed on identical inputs from both backends; outputs are
checked for bitwise equality before timing.
"""

from __future__ import annotations

import argparse
import sys
import timeit

import numpy as np

from aspector import _pykernels
from aspector.retrieval import index, search
from aspector.synthgen import build_world, default_world

try:
    from aspector import _kernels
except ImportError:
    _kernels = None


def workloads(corpus, queries, m=8):
    results = [search(corpus, q, m) for q in queries]
    rows = sorted({corpus.row(d.doc) for r in results for d in r.docs})
    pos = {r: i for i, r in enumerate(rows)}
    members, set_indptr = [], [0]
    for r in results:
        members += [pos[corpus.row(d.doc)] for d in r.docs]
        set_indptr.append(len(members))
    rows = np.array(rows, np.int64)
    gram = _pykernels.row_gram(rows, corpus.indptr, corpus.indices, corpus.data)
    q_idx, q_w = corpus.vectorize(queries[0])
    a, b = corpus.indptr[0], corpus.indptr[1]
    c, d = corpus.indptr[1], corpus.indptr[2]
    return {
        "sparse_dot": lambda k: k.sparse_dot(corpus.indices[a:b], corpus.data[a:b], corpus.indices[c:d], corpus.data[c:d]),
        "row_gram": lambda k: k.row_gram(rows, corpus.indptr, corpus.indices, corpus.data),
        "set_similarity_matrix": lambda k: k.set_similarity_matrix(
            gram, np.array(set_indptr, np.int64), np.array(members, np.int64)),
        "accumulate_scores": lambda k: k.accumulate_scores(
            q_idx, q_w, corpus.post_indptr, corpus.post_docs, corpus.post_weights, corpus.n_docs),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--aspects", type=int, default=30, help="result sets per similarity matrix")
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled kernels are not built; run `pip install -e .` first", file=sys.stderr)
        return 1

    world = build_world(default_world(args.seed))
    corpus = index(world.documents)
    planted = world.planted[0]
    queries = [s for v in planted.families.values() for s in v] + [q.full for q in world.queries]
    jobs = workloads(corpus, queries[: args.aspects])
    print(f"corpus: {corpus.n_docs} documents, {len(corpus.terms)} terms")
    print(f"{'kernel':<24}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for name, job in jobs.items():
        out_py, out_cy = job(_pykernels), job(_kernels)
        if not np.array_equal(np.asarray(out_py, float).view(np.uint64), np.asarray(out_cy, float).view(np.uint64)):
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        t_py = min(timeit.repeat(lambda: job(_pykernels), number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: job(_kernels), number=1, repeat=args.repeat))
        print(f"{name:<24}{t_py * 1e3:>12.3f}{t_cy * 1e3:>12.3f}{t_py / t_cy:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
