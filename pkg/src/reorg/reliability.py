"""Redundancy-based probability of survival.

Every resource type relevant to a functionality set forms one subsystem.  A
subsystem needing ``r`` instances with ``n`` available is modelled as ``n/r``
parallel blocks of ``r`` serial instances; subsystems are combined in series.
The block grouping is a heuristic: it is not the exact k-out-of-n survival
probability unless ``r == 1``.  :func:`monte_carlo_reliability` samples either
the exact instance-level criterion or the block model itself, which is what
the tests compare against.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import kernels
from .agents import CoalitionStructure, type_of
from .errors import DomainError, MissingAssignment
from .ontology import ResourceModel, card_max, instance_survival, is_instance_of


@dataclass(frozen=True)
class DemandEntry:
    required: int
    available: int
    p: float  # smallest survival probability among the counted instances
    instance_p: tuple[float, ...] = ()

    def block_reliability(self) -> float:
        """rsub over the best-surviving prefix of instances.

        With a single probability this is just ``rsub(req, avl, p)``.  When
        subconcepts carry different probabilities, every prefix of the
        instances sorted by decreasing probability is scored with its own
        minimum and the best is kept, so extra instances never hurt.
        """
        ps = sorted(self.instance_p or (self.p,) * self.available, reverse=True)
        if len(set(ps)) <= 1:
            return rsub(self.required, self.available, self.p)
        return max(rsub(self.required, k, ps[k - 1]) for k in range(self.required, len(ps) + 1))


def required_cardinalities(model: ResourceModel, functionalities: Iterable[str]) -> dict[str, int]:
    req: dict[str, int] = {}
    for f in functionalities:
        model.functionality(f)
        for c, n in model.flat_requirements[f].items():
            if n > 0:
                req[c] = max(req.get(c, 0), n)
    return req


def available_cardinalities(model: ResourceModel, agent_type: Mapping[str, int],
                            functionalities: Iterable[str]) -> dict[str, int]:
    return {c: card_max(model, c, agent_type) for c in required_cardinalities(model, functionalities)}


def _counted_instances(model: ResourceModel, agent_type: Mapping[str, int], c: str) -> list[str]:
    """Concept names of every resource instance in ``agent_type`` counted for ``c``."""
    out = []
    for atomic, gamma in agent_type.items():
        for r, n in model.agent_type(atomic).resources.items():
            if is_instance_of(model, r, c):
                out.extend([r] * (n * gamma))
    return out


def demand_profile(model: ResourceModel, agent_type: Mapping[str, int],
                   functionalities: Iterable[str]) -> dict[str, DemandEntry]:
    """req/avl/p per relevant resource type.

    ``p`` is the smallest survival probability among the counted instances;
    see :meth:`DemandEntry.block_reliability` for how mixed probabilities
    enter the reliability.
    """
    profile = {}
    for c, req in required_cardinalities(model, functionalities).items():
        ps = tuple(instance_survival(model, r) for r in _counted_instances(model, agent_type, c))
        p = min(ps) if ps else instance_survival(model, c)
        profile[c] = DemandEntry(req, len(ps), p, ps)
    return profile


def rsub(r: int, n: int, p: float) -> float:
    if r < 1:
        raise DomainError(f"required count must be >= 1, got {r}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability must lie in [0, 1], got {p}")
    if n < r:
        return 0.0
    return 1.0 - (1.0 - p**r) ** (n / r)


def reliability(model: ResourceModel, agent_type: Mapping[str, int], functionalities: Iterable[str]) -> float:
    result = 1.0
    for entry in demand_profile(model, agent_type, functionalities).values():
        result *= entry.block_reliability()
    return result


def reliability_cs(model: ResourceModel, cs: CoalitionStructure, a2f: Mapping) -> float:
    """Minimum reliability over the operative agents of ``cs``.

    ``a2f`` maps each general agent of ``cs`` to its functionality set.
    """
    values = []
    for ga in cs:
        if ga not in a2f:
            raise MissingAssignment(f"no functionality set assigned to {ga!r}")
        values.append(reliability(model, type_of(ga), a2f[ga]))
    return min(values, default=1.0)


def exact_instance_reliability(model: ResourceModel, agent_type: Mapping[str, int],
                               functionalities: Iterable[str]) -> float:
    """Exact probability that every resource type keeps at least ``req`` survivors.

    Enumerates all survival states of the counted instances, so only suitable
    for small profiles (used as ground truth in tests and the CLI).
    """
    profile = demand_profile(model, agent_type, functionalities)
    entries = list(profile.values())
    if any(e.available < e.required for e in entries):
        return 0.0
    owner = [g for g, e in enumerate(entries) for _ in e.instance_p]
    if len(owner) > 24:
        raise DomainError(f"{len(owner)} instances is too many for exhaustive enumeration")
    probs = [p for e in entries for p in e.instance_p]
    total = 0.0
    for state in itertools.product((False, True), repeat=len(owner)):
        alive = [0] * len(entries)
        weight = 1.0
        for g, p, up in zip(owner, probs, state):
            weight *= p if up else 1.0 - p
            alive[g] += up
        if all(a >= e.required for a, e in zip(alive, entries)):
            total += weight
    return total


def monte_carlo_reliability(model: ResourceModel, agent_type: Mapping[str, int],
                            functionalities: Iterable[str], trials: int, seed: int,
                            mode: str = "k_of_n", chunk: int = 65536) -> tuple[float, float]:
    """Sample instance survival and return ``(estimate, binomial stderr)``.

    ``mode="k_of_n"``: a trial succeeds when every resource type has at least
    ``req`` surviving instances.  ``mode="blocks"``: instances of each type are
    grouped into consecutive blocks of ``req``; a type survives when one whole
    block does.  For ``n`` a multiple of ``req`` the latter is exactly the
    system that :func:`reliability` scores.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    if mode not in ("k_of_n", "blocks"):
        raise DomainError(f"unknown sampling mode {mode!r}")
    profile = demand_profile(model, agent_type, functionalities)
    if any(e.available < e.required for e in profile.values()):
        return 0.0, 0.0
    if not profile:
        return 1.0, 0.0

    p_inst, group, req = [], [], []
    for g, entry in enumerate(profile.values()):
        p_inst.extend(sorted(entry.instance_p, reverse=True))
        group.extend([g] * entry.available)
        req.append(entry.required)
    p_inst = np.asarray(p_inst, dtype=np.float64)
    group = np.asarray(group, dtype=np.int64)
    req = np.asarray(req, dtype=np.int64)

    rng = np.random.default_rng(seed)
    successes = 0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        draws = rng.random((m, p_inst.size))
        if mode == "k_of_n":
            successes += kernels.count_k_of_n(draws, p_inst, group, req)
        else:
            successes += kernels.count_blocks(draws, p_inst, group, req)
        done += m
    est = successes / trials
    stderr = math.sqrt(est * (1.0 - est) / trials)
    return est, stderr
