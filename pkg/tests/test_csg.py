import random
import time

import pytest

from reorg import (
    AtomicAgent,
    CoalitionStructure,
    connection_feasible,
    efficacy_cs,
    efficacy_type,
    instantiate,
    load_model,
    type_of,
)
from reorg.csg import CsgBudget, enumerate_structures, find_feasible_structure
from reorg.errors import BudgetExceeded, DomainError, UnknownFunctionality

from randmodels import random_model


def set_partitions(items):
    """Recursive partition generator, independent of the kernels."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def bell(n):
    return sum(1 for _ in set_partitions(list(range(n))))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_counts_are_bell(n):
    pool = [AtomicAgent(f"a{i}", "Payload") for i in range(n)]
    structures = enumerate_structures(pool)
    assert len(structures) == bell(n)
    assert len({cs.canonical() for cs in structures}) == len(structures)
    assert all(cs.pool == frozenset(pool) for cs in structures)


def test_count_examples():
    assert bell(3) == 5 and bell(6) == 203
    assert len(enumerate_structures([AtomicAgent("x", "A")])) == 1


def test_enumeration_with_link_filter(model):
    pool = instantiate({"CoyoteIII": 1, "CREX": 1, "Payload": 1})
    structures = enumerate_structures(pool, model=model)
    # CoyoteIII and CREX only carry male plugs: they cannot be linked to each other directly
    for cs in structures:
        for block in cs:
            assert connection_feasible(model, type_of(block))
    assert len(structures) < bell(3)


def test_budget():
    pool = [AtomicAgent(f"a{i}", "A") for i in range(9)]
    with pytest.raises(BudgetExceeded):
        enumerate_structures(pool)
    with pytest.raises(BudgetExceeded):
        enumerate_structures(pool[:8], CsgBudget(deadline=0.0))
    with pytest.raises(DomainError):
        CsgBudget(max_atoms=0)


def test_feasible_examples(model):
    pool = instantiate({"SherpaTT": 1, "Payload": 1})
    cs = find_feasible_structure(model, pool, ["MoveTo"])
    assert cs == CoalitionStructure([pool])
    assert efficacy_cs(model, cs, ["MoveTo"]) == 1
    assert find_feasible_structure(model, instantiate({"Payload": 3}), ["MoveTo"]) is None
    singles = find_feasible_structure(model, pool, [])
    assert singles == CoalitionStructure([[a] for a in pool])
    with pytest.raises(UnknownFunctionality):
        find_feasible_structure(model, pool, ["Fly"])


def test_feasible_prefers_fewer_blocks(model):
    pool = instantiate({"SherpaTT": 1, "CoyoteIII": 1})
    # both move alone; one linked pair is preferred
    assert len(find_feasible_structure(model, pool, ["MoveTo"])) == 1


def oracle(model, pool, fs):
    best = None
    for part in set_partitions(sorted(pool)):
        if all(efficacy_type(model, type_of(b), fs) and connection_feasible(model, type_of(b)) for b in part):
            cs = CoalitionStructure(part)
            rank = (len(cs), cs.canonical())
            best = rank if best is None or rank < best else best
    return best


def test_feasible_matches_exhaustive_oracle():
    start = time.monotonic()
    rng = random.Random(2024)
    checked = 0
    for seed in range(50):
        m = random_model(seed)
        types = sorted(m.agent_types)
        for _ in range(3):
            n = rng.randint(1, 6)
            pool = [AtomicAgent(f"a{i}", rng.choice(types)) for i in range(n)]
            fs = rng.sample(sorted(m.functionalities), rng.randint(1, 2))
            got = find_feasible_structure(m, pool, fs)
            want = oracle(m, pool, fs)
            if want is None:
                assert got is None
            else:
                assert got is not None
                assert got.pool == frozenset(pool)
                assert efficacy_cs(m, got, fs) == 1
                assert (len(got), got.canonical()) == want
            checked += 1
    assert checked == 150
    assert time.monotonic() - start < 30
