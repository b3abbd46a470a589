"""Resource support, functionality availability and efficacy.

Support values are exact :class:`~fractions.Fraction` objects so the ``>= 1``
threshold is never subject to rounding.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .agents import CoalitionStructure, type_of
from .ontology import ResourceModel, card_max, card_min

FULL = Fraction(1)


def support_resource(model: ResourceModel, agent_type: Mapping[str, int], c: str, f: str) -> Fraction:
    required = card_min(model, c, f)
    if required == 0:
        return Fraction(0)
    return Fraction(card_max(model, c, agent_type), required)


def support_functionality(model: ResourceModel, agent_type: Mapping[str, int], f: str) -> Fraction:
    model.functionality(f)
    relevant = [c for c, n in model.flat_requirements[f].items() if n >= 1]
    if not relevant:
        return FULL
    return min(support_resource(model, agent_type, c, f) for c in relevant)


def support_set(model: ResourceModel, agent_type: Mapping[str, int], functionalities: Iterable[str]) -> Fraction:
    values = [support_functionality(model, agent_type, f) for f in functionalities]
    return min(values, default=FULL)


def has_functionality(model: ResourceModel, agent_type: Mapping[str, int], f: str) -> bool:
    return support_functionality(model, agent_type, f) >= 1


def efficacy_type(model: ResourceModel, agent_type: Mapping[str, int], functionalities: Iterable[str]) -> int:
    return int(support_set(model, agent_type, functionalities) >= 1)


def efficacy_cs(model: ResourceModel, cs: CoalitionStructure, functionalities: Iterable[str]) -> int:
    functionalities = list(functionalities)
    return min((efficacy_type(model, type_of(ga), functionalities) for ga in cs), default=1)
