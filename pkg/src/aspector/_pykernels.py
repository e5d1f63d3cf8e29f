"""Pure-Python reference kernels.

Every routine here has a twin in ``_kernels.pyx``. Both accumulate in the same
order, so the two backends agree bit-for-bit; tests hold them to that.

Sparse vectors are CSR rows: ``indptr``/``indices``/``data`` with ``indices``
sorted ascending inside each row.
"""

import numpy as np


def _dot(ai, av, bi, bv):
    i = j = 0
    na, nb = len(ai), len(bi)
    acc = 0.0
    while i < na and j < nb:
        x, y = ai[i], bi[j]
        if x == y:
            acc += av[i] * bv[j]
            i += 1
            j += 1
        elif x < y:
            i += 1
        else:
            j += 1
    return acc


def sparse_dot(a_idx, a_val, b_idx, b_val):
    """Merge-join dot product of two sorted sparse vectors."""
    return _dot(list(a_idx), list(a_val), list(b_idx), list(b_val))


def row_gram(rows, indptr, indices, data):
    """Dot products between every pair of the given CSR rows.

    Returns a dense ``(len(rows), len(rows))`` float64 array.
    """
    rows = [int(r) for r in rows]
    indptr = indptr.tolist()
    idx_all = indices.tolist()
    val_all = data.tolist()
    vecs = [
        (idx_all[indptr[r]:indptr[r + 1]], val_all[indptr[r]:indptr[r + 1]])
        for r in rows
    ]
    n = len(rows)
    out = np.zeros((n, n), dtype=np.float64)
    for a in range(n):
        ai, av = vecs[a]
        for b in range(a, n):
            bi, bv = vecs[b]
            v = _dot(ai, av, bi, bv)
            out[a, b] = v
            out[b, a] = v
    return out


def _max_match(gram, sa, sb):
    na, nb = len(sa), len(sb)
    if na == 0 or nb == 0:
        return 0.0
    row_sum = 0.0
    for a in sa:
        best = 0.0
        for b in sb:
            v = gram[a][b]
            if v > best:
                best = v
        row_sum += best
    col_sum = 0.0
    for b in sb:
        best = 0.0
        for a in sa:
            v = gram[a][b]
            if v > best:
                best = v
        col_sum += best
    return row_sum / (2.0 * na) + col_sum / (2.0 * nb)


def set_similarity_matrix(gram, set_indptr, set_members):
    """Max-match similarity between every pair of document sets.

    ``gram`` holds document-document similarities; set ``s`` consists of the
    gram positions ``set_members[set_indptr[s]:set_indptr[s + 1]]``.
    """
    g = gram.tolist()
    ptr = set_indptr.tolist()
    mem = set_members.tolist()
    sets = [mem[ptr[s]:ptr[s + 1]] for s in range(len(ptr) - 1)]
    n = len(sets)
    out = np.zeros((n, n), dtype=np.float64)
    for s in range(n):
        for t in range(s, n):
            v = _max_match(g, sets[s], sets[t])
            out[s, t] = v
            out[t, s] = v
    return out


def accumulate_scores(q_terms, q_weights, post_indptr, post_docs, post_weights, n_docs):
    """Score every document against a query through the inverted index."""
    scores = [0.0] * int(n_docs)
    ptr = post_indptr.tolist()
    docs = post_docs.tolist()
    weights = post_weights.tolist()
    for t, w in zip(q_terms.tolist(), q_weights.tolist()):
        for p in range(ptr[t], ptr[t + 1]):
            scores[docs[p]] += w * weights[p]
    return np.asarray(scores, dtype=np.float64)
