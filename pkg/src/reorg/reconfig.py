"""Heuristic time cost of moving between coalition structures.

Forming an agent costs ``t_a`` per source agent it draws atoms from plus
``t_b`` per atom it contains.  Only the source agents actually involved are
charged, and an agent that already exists in the source structure costs
nothing.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .agents import AtomicAgent, CoalitionStructure, GeneralAgent
from .errors import DomainError, PoolMismatch, UnknownAtom


@dataclass(frozen=True)
class ReconfigParams:
    t_a: float = 600.0
    t_b: float = 100.0

    def __post_init__(self):
        if self.t_a < 0 or self.t_b < 0:
            raise DomainError("reconfiguration time constants must be >= 0")


DEFAULTS = ReconfigParams()


def formation_cost(ga: Iterable[AtomicAgent], cs: CoalitionStructure, params: ReconfigParams = DEFAULTS) -> float:
    ga = frozenset(ga)
    missing = ga - cs.pool
    if missing:
        raise UnknownAtom(f"atoms {sorted(a.id for a in missing)} are not in the source structure")
    if ga in cs:
        return 0.0
    involved = sum(1 for source in cs if source & ga)
    return params.t_a * involved + params.t_b * len(ga)


def transition_cost(cs_i: CoalitionStructure, cs_j: CoalitionStructure,
                    params: ReconfigParams = DEFAULTS) -> float:
    if cs_i.pool != cs_j.pool:
        raise PoolMismatch("coalition structures are over different agent pools")
    return sum(formation_cost(ga, cs_i, params) for ga in cs_j)


def restrict(cs: CoalitionStructure, atoms: Iterable[AtomicAgent]) -> CoalitionStructure:
    """Project a structure onto a subset of its pool, dropping emptied agents."""
    atoms = frozenset(atoms)
    return CoalitionStructure([GeneralAgent(b & atoms) for b in cs if b & atoms])
