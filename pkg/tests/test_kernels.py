import itertools

import numpy as np
import pytest

from reorg import kernels

BACKENDS = kernels.available_backends()
BELL = [1, 1, 2, 5, 15, 52, 203, 877, 4140]


def test_backend_selected():
    assert kernels.BACKEND in BACKENDS


def brute_partitions(n):
    """Canonical labelings of all set partitions via an independent route."""
    seen = set()
    for labels in itertools.product(range(n), repeat=n):
        relabel: dict = {}
        seen.add(tuple(relabel.setdefault(x, len(relabel)) for x in labels))
    return sorted(seen)


@pytest.mark.parametrize("name", sorted(BACKENDS))
@pytest.mark.parametrize("n", range(0, 7))
def test_restricted_growth_strings(name, n):
    rows = BACKENDS[name].restricted_growth_strings(n)
    assert len(rows) == BELL[n]
    got = [tuple(int(x) for x in r) for r in rows]
    assert got == brute_partitions(n)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_bell_8(name):
    assert len(BACKENDS[name].restricted_growth_strings(8)) == BELL[8]


def numpy_counts(draws, p, group, req):
    alive = draws < p
    k_of_n = np.ones(len(draws), dtype=bool)
    blocks = np.ones(len(draws), dtype=bool)
    for g, r in enumerate(req):
        cols = np.flatnonzero(group == g)
        k_of_n &= alive[:, cols].sum(axis=1) >= r
        ok = np.zeros(len(draws), dtype=bool)
        for start in range(0, len(cols) - r + 1, r):
            ok |= alive[:, cols[start:start + r]].all(axis=1)
        blocks &= ok
    return int(k_of_n.sum()), int(blocks.sum())


@pytest.mark.parametrize("name", sorted(BACKENDS))
@pytest.mark.parametrize("seed", range(5))
def test_survival_counts_match_numpy(name, seed):
    rng = np.random.default_rng(seed)
    req = rng.integers(1, 4, size=3)
    avail = req + rng.integers(0, 4, size=3)
    group = np.repeat(np.arange(3), avail).astype(np.int64)
    p = rng.uniform(0.3, 1.0, size=group.size)
    draws = rng.random((2000, group.size))
    backend = BACKENDS[name]
    expected = numpy_counts(draws, p, group, req)
    assert backend.count_k_of_n(draws, p, group, req.astype(np.int64)) == expected[0]
    assert backend.count_blocks(draws, p, group, req.astype(np.int64)) == expected[1]
