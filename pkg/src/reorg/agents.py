"""Atomic, composite and general agents, their types, and coalition structures."""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .errors import UnknownConcept, ValidationError
from .ontology import ResourceModel, is_instance_of


@dataclass(frozen=True, order=True)
class AtomicAgent:
    id: str
    type: str

    def __str__(self):
        return self.id


@dataclass(frozen=True)
class Role:
    name: str
    type: str


class GeneralAgentType(Mapping[str, int]):
    """Multiset of atomic agent types (the gamma function).

    Zero counts are dropped so that equality is count-wise.
    """

    __slots__ = ("_items", "_hash")

    def __init__(self, counts: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        if isinstance(counts, Mapping):
            counts = counts.items()
        merged: Counter = Counter()
        for name, n in counts:
            if isinstance(n, bool) or not isinstance(n, int) or n < 0:
                raise ValueError(f"cardinality of {name!r} must be a non-negative integer, got {n!r}")
            merged[name] += n
        self._items = tuple(sorted((k, v) for k, v in merged.items() if v))
        self._hash = hash(self._items)

    @classmethod
    def of(cls, *names: str) -> "GeneralAgentType":
        return cls(Counter(names))

    def __getitem__(self, key):
        for k, v in self._items:
            if k == key:
                return v
        raise KeyError(key)

    def get(self, key, default=0):
        return dict(self._items).get(key, default)

    def __iter__(self):
        return (k for k, _ in self._items)

    def __len__(self):
        return len(self._items)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if isinstance(other, GeneralAgentType):
            return self._items == other._items
        if isinstance(other, Mapping):
            return self == GeneralAgentType(other)
        return NotImplemented

    def __lt__(self, other):
        return self._items < other._items

    def __repr__(self):
        body = ",".join(f"({k},{v})" for k, v in self._items)
        return "{" + body + "}"

    @property
    def size(self) -> int:
        return sum(v for _, v in self._items)

    def key(self) -> tuple[tuple[str, int], ...]:
        return self._items

    def __or__(self, other):
        return union_types(self, other)

    def __sub__(self, other: Mapping[str, int]) -> "GeneralAgentType":
        return GeneralAgentType({k: max(0, v - other.get(k, 0)) for k, v in self._items})

    def contains(self, other: Mapping[str, int]) -> bool:
        """Count-wise ``other`` <= ``self``."""
        return all(self.get(k, 0) >= v for k, v in other.items())

    def expand(self) -> list[str]:
        return [k for k, v in self._items for _ in range(v)]


def union_types(t1: Mapping[str, int], t2: Mapping[str, int]) -> GeneralAgentType:
    return GeneralAgentType(list(t1.items()) + list(t2.items()))


def instantiate(agent_type: Mapping[str, int]) -> list[AtomicAgent]:
    """Canonical instances ``i(A)`` of a general agent type, named ``<type>_<k>``."""
    return [AtomicAgent(f"{name}_{k}", name) for name, n in sorted(agent_type.items()) for k in range(n)]


class GeneralAgent(frozenset):
    """Non-empty set of atomic agents acting as one physical coalition."""

    def __new__(cls, members: Iterable[AtomicAgent] = ()):
        self = super().__new__(cls, members)
        if not self:
            raise ValueError("a general agent needs at least one atomic agent")
        return self

    @property
    def is_composite(self) -> bool:
        return len(self) > 1

    def ids(self) -> tuple[str, ...]:
        return tuple(sorted(a.id for a in self))

    def __repr__(self):
        return "{" + ",".join(self.ids()) + "}"


def type_of(agent: Iterable[AtomicAgent]) -> GeneralAgentType:
    return GeneralAgentType(Counter(a.type for a in agent))


class CoalitionStructure(frozenset):
    """Disjoint cover of an agent pool by general agents."""

    def __new__(cls, agents: Iterable[Iterable[AtomicAgent]], pool: Iterable[AtomicAgent] | None = None):
        blocks = [a if isinstance(a, GeneralAgent) else GeneralAgent(a) for a in agents]
        self = super().__new__(cls, blocks)
        seen: set[AtomicAgent] = set()
        for block in blocks:
            overlap = seen & block
            if overlap:
                raise ValidationError(f"atomic agents {sorted(a.id for a in overlap)} appear in two agents")
            seen |= block
        if len(blocks) != len(self):
            raise ValidationError("duplicate general agents in coalition structure")
        if pool is not None and seen != set(pool):
            raise ValidationError("coalition structure does not cover the pool exactly")
        return self

    @property
    def pool(self) -> frozenset[AtomicAgent]:
        return frozenset(itertools.chain.from_iterable(self))

    def agent_of(self, atom: AtomicAgent) -> GeneralAgent:
        for block in self:
            if atom in block:
                return block
        raise KeyError(atom)

    def canonical(self) -> tuple[tuple[str, ...], ...]:
        return tuple(sorted(b.ids() for b in self))

    def __repr__(self):
        return "{" + ", ".join("{" + ",".join(b) + "}" for b in self.canonical()) + "}"


# ---------------------------------------------------------------------------
# link space


def _interface_slots(model: ResourceModel, atomic: str) -> dict[tuple[str, str], int]:
    slots: Counter = Counter()
    for iface in model.agent_type(atomic).interfaces:
        slots[(iface.type, iface.gender)] += iface.count
    return dict(slots)


def connection_feasible(model: ResourceModel, agent_type: Mapping[str, int]) -> bool:
    """Whether the atoms of ``agent_type`` can be linked into one spanning tree.

    Each link pairs a free male interface on one atom with a compatible free
    female interface on another.  Interfaces are compatible when one concept is
    an instance of the other.  Geometry is ignored.
    """
    atoms = GeneralAgentType(agent_type)
    for name in atoms:
        model.agent_type(name)
    n = atoms.size
    if n <= 1:
        return True

    types = list(atoms)
    slots = {t: _interface_slots(model, t) for t in types}
    keys = sorted({k for s in slots.values() for k in s})
    males = [k for k in keys if k[1] == "male"]
    females = [k for k in keys if k[1] == "female"]
    # (male key, female key) pairs that can be plugged together
    pairs = [(m, f) for m in males for f in females
             if is_instance_of(model, m[0], f[0]) or is_instance_of(model, f[0], m[0])]
    if not pairs:
        return False

    index = {k: i for i, k in enumerate(keys)}
    cap = {t: tuple(slots[t].get(k, 0) for k in keys) for t in types}

    # necessary conditions: every atom has an interface; enough males and females for n-1 links
    if any(sum(cap[t]) == 0 for t in types):
        return False
    total_m = sum(atoms[t] * cap[t][index[k]] for t in types for k in males)
    total_f = sum(atoms[t] * cap[t][index[k]] for t in types for k in females)
    if total_m < n - 1 or total_f < n - 1:
        return False

    def dec(vec, i):
        return vec[:i] + (vec[i] - 1,) + vec[i + 1:]

    seen: set = set()

    def grow(remaining: tuple[int, ...], tree: tuple) -> bool:
        if not any(remaining):
            return True
        state = (remaining, tree)
        if state in seen:
            return False
        seen.add(state)
        tree_list = list(tree)
        for ti, left in enumerate(remaining):
            if not left:
                continue
            new_cap = cap[types[ti]]
            rest = remaining[:ti] + (left - 1,) + remaining[ti + 1:]
            for pos, (_, free) in enumerate(tree_list):
                if pos and tree_list[pos] == tree_list[pos - 1]:
                    continue  # identical node already tried
                for m, f in pairs:
                    mi, fi = index[m], index[f]
                    # new atom plugs its male into a free female of the tree node, or vice versa
                    for a, b in ((mi, fi), (fi, mi)):
                        if new_cap[a] > 0 and free[b] > 0:
                            nodes = tree_list[:pos] + [(tree_list[pos][0], dec(free, b))] + tree_list[pos + 1:]
                            nodes.append((types[ti], dec(new_cap, a)))
                            if grow(rest, tuple(sorted(nodes))):
                                return True
        return False

    start = tuple(atoms[t] for t in types)
    for ti, t in enumerate(types):
        remaining = start[:ti] + (start[ti] - 1,) + start[ti + 1:]
        if grow(remaining, ((t, cap[t]),)):
            return True
    return False


def sub_multisets(pool: Mapping[str, int], bound: int) -> Iterator[GeneralAgentType]:
    pool = GeneralAgentType(pool)
    names = list(pool)
    for counts in itertools.product(*(range(pool[n] + 1) for n in names)):
        size = sum(counts)
        if 1 <= size <= bound:
            yield GeneralAgentType(zip(names, counts))


def enumerate_dormant_types(pool: Mapping[str, int], bound: int,
                            model: ResourceModel | None = None) -> list[GeneralAgentType]:
    """All type-distinct sub-multisets of ``pool`` with 1..``bound`` atoms, lexicographically ordered.

    With a model, types that cannot be physically linked are dropped.
    """
    if bound < 1:
        return []
    out = sorted(set(sub_multisets(pool, bound)))
    if model is not None:
        out = [t for t in out if connection_feasible(model, t)]
    return out


def parse_type_spec(spec: str) -> GeneralAgentType:
    """Parse ``"SherpaTT,Payload:3"`` or ``"SherpaTT,Payload,Payload"`` into a type."""
    counts: Counter = Counter()
    for part in filter(None, (p.strip() for p in spec.split(","))):
        name, _, n = part.partition(":")
        if not n:
            name, _, n = part.partition("*")
        try:
            counts[name.strip()] += int(n) if n else 1
        except ValueError:
            raise UnknownConcept(f"bad agent type spec {part!r}") from None
    return GeneralAgentType(counts)
