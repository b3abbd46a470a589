"""Pure-Python/numpy implementations of the hot kernels.

Same signatures and results as the compiled ``_kernels`` extension; used when
the extension is not built or ``REORG_PURE=1`` is set.
"""
import numpy as np


def count_k_of_n(draws, p, group, req):
    """Trials in which every group keeps at least ``req[g]`` alive instances."""
    alive = draws < p
    counts = np.zeros((draws.shape[0], req.size), dtype=np.int64)
    for g in range(req.size):
        counts[:, g] = alive[:, group == g].sum(axis=1)
    return int(np.all(counts >= req, axis=1).sum())


def count_blocks(draws, p, group, req):
    """Trials in which every group has one complete block of ``req[g]`` alive instances."""
    alive = draws < p
    ok = np.ones(draws.shape[0], dtype=bool)
    for g in range(req.size):
        cols = np.flatnonzero(group == g)
        r = int(req[g])
        nblocks = cols.size // r
        if nblocks == 0:
            return 0
        blocks = alive[:, cols[: nblocks * r]].reshape(draws.shape[0], nblocks, r)
        ok &= blocks.all(axis=2).any(axis=1)
    return int(ok.sum())


def restricted_growth_strings(n):
    """All set partitions of ``range(n)`` as restricted growth strings, lexicographic.

    Row ``k`` assigns element ``i`` to block ``out[k, i]``.
    """
    if n == 0:
        return np.zeros((1, 0), dtype=np.int8)
    rows = []
    a = [0] * n

    def extend(i, top):
        # top = number of blocks opened so far
        if i == n:
            rows.append(list(a))
            return
        for v in range(top + 1):
            a[i] = v
            extend(i + 1, max(top, v + 1))

    extend(1, 1)
    return np.asarray(rows, dtype=np.int8)
