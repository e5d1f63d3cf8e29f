"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
twin is used. Set ``ASPECTOR_PURE_PYTHON=1`` to force the fallback.
"""

import logging
import os

log = logging.getLogger(__name__)

if os.environ.get("ASPECTOR_PURE_PYTHON", "") not in ("", "0"):
    from ._pykernels import accumulate_scores, row_gram, set_similarity_matrix, sparse_dot

    BACKEND = "python"
else:
    try:
        from ._kernels import accumulate_scores, row_gram, set_similarity_matrix, sparse_dot

        BACKEND = "cython"
    except ImportError:
        log.debug("compiled kernels unavailable, using pure-Python fallback")
        from ._pykernels import accumulate_scores, row_gram, set_similarity_matrix, sparse_dot

        BACKEND = "python"

__all__ = ["BACKEND", "accumulate_scores", "row_gram", "set_similarity_matrix", "sparse_dot"]
