import pytest
from hypothesis import given, settings, strategies as st

from reorg import AtomicAgent, CoalitionStructure
from reorg.errors import DomainError, PoolMismatch, UnknownAtom
from reorg.reconfig import DEFAULTS, ReconfigParams, formation_cost, restrict, transition_cost

a1, a2, a3, a4 = (AtomicAgent(f"a{i}", "Payload") for i in range(1, 5))
CS = CoalitionStructure


def test_defaults():
    assert (DEFAULTS.t_a, DEFAULTS.t_b) == (600, 100)
    with pytest.raises(DomainError):
        ReconfigParams(t_a=-1)


def test_formation_examples():
    src = CS([[a1, a2], [a3]])
    assert formation_cost([a1, a2, a3], src) == 600 * 2 + 100 * 3
    assert formation_cost([a1, a2], src) == 0
    assert formation_cost([a1], src) == 700
    with pytest.raises(UnknownAtom):
        formation_cost([a4], src)


def test_transition_examples():
    singles = CS([[a1], [a2], [a3]])
    assert transition_cost(singles, CS([[a1, a2, a3]])) == 2100
    assert transition_cost(CS([[a1, a2], [a3]]), CS([[a1], [a2, a3]])) == 2100
    assert transition_cost(singles, singles) == 0
    assert transition_cost(singles, CS([[a1, a2, a3]]), ReconfigParams(1, 0)) == 3
    with pytest.raises(PoolMismatch):
        transition_cost(singles, CS([[a1, a2]]))


def test_restrict():
    cs = CS([[a1, a2], [a3, a4]])
    assert restrict(cs, [a1, a3, a4]) == CS([[a1], [a3, a4]])


def partitions(draw, atoms):
    labels = draw(st.lists(st.integers(0, len(atoms) - 1), min_size=len(atoms), max_size=len(atoms)))
    blocks: dict = {}
    for atom, b in zip(atoms, labels):
        blocks.setdefault(b, []).append(atom)
    return CS(blocks.values())


@st.composite
def structure_pairs(draw):
    n = draw(st.integers(1, 7))
    atoms = [AtomicAgent(f"x{i}", draw(st.sampled_from(["A", "B"]))) for i in range(n)]
    return atoms, partitions(draw, atoms), partitions(draw, atoms)


@settings(max_examples=200)
@given(structure_pairs(), st.floats(0.1, 1e4), st.floats(0.1, 1e4))
def test_transition_properties(pair, t_a, t_b):
    atoms, ci, cj = pair
    params = ReconfigParams(t_a, t_b)
    cost = transition_cost(ci, cj, params)
    assert cost >= 0
    assert (cost == 0) == (ci == cj)
    # consistent renaming
    rename = {a: AtomicAgent("r" + a.id, a.type) for a in atoms}
    ren = lambda cs: CS([[rename[a] for a in b] for b in cs])
    assert transition_cost(ren(ci), ren(cj), params) == pytest.approx(cost)
    # an untouched extra agent changes nothing
    extra = [AtomicAgent("z0", "A"), AtomicAgent("z1", "B")]
    assert transition_cost(CS(list(ci) + [extra]), CS(list(cj) + [extra]), params) == pytest.approx(cost)
