"""Coalition structure enumeration and feasibility search."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from . import kernels
from .agents import AtomicAgent, CoalitionStructure, GeneralAgent, connection_feasible, type_of
from .capability import efficacy_type
from .errors import BudgetExceeded, DomainError
from .ontology import ResourceModel


@dataclass(frozen=True)
class CsgBudget:
    max_atoms: int = 8
    deadline: float | None = None  # seconds

    def __post_init__(self):
        if self.max_atoms < 1:
            raise DomainError("max_atoms must be >= 1")


def _check(pool: Sequence[AtomicAgent], budget: CsgBudget) -> list[AtomicAgent]:
    pool = sorted(set(pool))
    if len(pool) > budget.max_atoms:
        raise BudgetExceeded(f"{len(pool)} atoms exceed the exact-enumeration budget of {budget.max_atoms}")
    return pool


def _partitions(pool: list[AtomicAgent], budget: CsgBudget) -> Iterator[list[list[AtomicAgent]]]:
    start = time.monotonic()
    for row in kernels.restricted_growth_strings(len(pool)):
        if budget.deadline is not None and time.monotonic() - start > budget.deadline:
            raise BudgetExceeded("coalition structure enumeration ran past its deadline")
        blocks: list[list[AtomicAgent]] = [[] for _ in range(int(row.max()) + 1 if len(row) else 0)]
        for atom, b in zip(pool, row):
            blocks[b].append(atom)
        yield blocks


def enumerate_structures(pool: Iterable[AtomicAgent], budget: CsgBudget = CsgBudget(),
                         model: ResourceModel | None = None) -> list[CoalitionStructure]:
    """Every set partition of ``pool`` once, in restricted-growth-string order.

    With a model, partitions containing a block that cannot be physically
    linked are skipped.
    """
    pool = _check(list(pool), budget)
    if not pool:
        return [CoalitionStructure([])]
    feasible: dict = {}
    out = []
    for blocks in _partitions(pool, budget):
        if model is not None:
            ok = True
            for b in blocks:
                t = type_of(b)
                if t not in feasible:
                    feasible[t] = connection_feasible(model, t)
                if not feasible[t]:
                    ok = False
                    break
            if not ok:
                continue
        out.append(CoalitionStructure(blocks))
    return out


def find_feasible_structure(model: ResourceModel, pool: Iterable[AtomicAgent], functionalities: Iterable[str],
                            budget: CsgBudget = CsgBudget()) -> CoalitionStructure | None:
    """A structure in which every agent supports ``functionalities``, or None.

    Preference: fewest agents, then the lexicographically smallest canonical
    form.  Block verdicts are cached per agent type, so partitions that only
    permute same-typed atoms cost a lookup.
    An empty functionality set needs no coupling at all, so the all-singletons
    structure is returned for it.
    """
    functionalities = list(functionalities)
    for f in functionalities:
        model.functionality(f)
    pool = _check(list(pool), budget)
    if not functionalities:
        return CoalitionStructure([[a] for a in pool])

    verdict: dict = {}

    def block_ok(block) -> bool:
        t = type_of(block)
        if t not in verdict:
            verdict[t] = bool(efficacy_type(model, t, functionalities)) and connection_feasible(model, t)
        return verdict[t]

    best = None
    for blocks in _partitions(pool, budget):
        if best is not None and len(blocks) > best[0][0]:
            continue
        if not all(block_ok(b) for b in blocks):
            continue
        cs = CoalitionStructure(blocks)
        rank = (len(cs), cs.canonical())
        if best is None or rank < best[0]:
            best = (rank, cs)
    return None if best is None else best[1]
