"""Objectives of a solution candidate: energy, fulfilment, safety and cost."""
from __future__ import annotations

from dataclasses import dataclass

from ..agents import AtomicAgent, CoalitionStructure, GeneralAgentType
from ..capability import has_functionality, support_set
from ..errors import DomainError
from ..mission import Mission, ModelConstraint
from ..policies import ocost, pvalue_composite
from ..reconfig import transition_cost
from ..reliability import reliability
from .flow import FeasibilityReport, check_flow, stays
from .generate import CARRY, START, context, timeline_network
from .model import SolutionCandidate, SolutionScore, Weights

J_PER_KWH = 3.6e6


@dataclass(frozen=True)
class Metrics:
    energy: float  # kWh
    sat: float
    saf: float
    reconfig_total: float
    satisfied: frozenset


def _constraint_holds(mission: Mission, cand: SolutionCandidate, c: ModelConstraint) -> bool:
    model = mission.model
    if any(s not in cand.assignments for s in c.requirements):
        return False
    types = {s: cand.assigned_type(s) for s in c.requirements}
    if c.kind == "minCard":
        return all(t.get(c.type, 0) >= c.value for t in types.values())
    if c.kind == "maxCard":
        return all(t.get(c.type, 0) <= c.value for t in types.values())
    if c.kind == "minFunc":
        return all(has_functionality(model, t, c.functionality) for t in types.values())
    if c.kind in ("minProp", "maxProp"):
        for t in types.values():
            if c.functionality and not has_functionality(model, t, c.functionality):
                return False
            v = pvalue_composite(model, t, c.prop)
            if (v < c.value) if c.kind == "minProp" else (v > c.value):
                return False
        return True
    if c.kind in ("allDistinct", "minDistinct", "maxDistinct"):
        used = [a for s in c.requirements for a in cand.assignments[s] if cand.atom_types[a] == c.type]
        if c.kind == "allDistinct":
            return len(used) == len(set(used))
        n = len(set(used))
        return n >= c.value if c.kind == "minDistinct" else n <= c.value
    # equality of roles across the requirements
    shared = sum(all(r in cand.assignments[s] for s in c.requirements) for r in c.roles)
    if c.kind == "allEqual":
        return shared == len(c.roles)
    return shared >= c.value if c.kind == "minEqual" else shared <= c.value


def satisfied(mission: Mission, cand: SolutionCandidate, flow: FeasibilityReport | None = None) -> frozenset:
    """Requirements met by ``cand``: bound, supported, reachable and within the model constraints."""
    ctx = context(mission)
    flow = flow or check_flow(mission, cand)
    unreachable = {p for d in flow.failed for p in d.purposes}
    out = set()
    for s in mission.requirements:
        if s.id not in cand.assignments or s.id in unreachable:
            continue
        t = cand.assigned_type(s.id)
        if not t.contains(ctx.needed[s.id]):
            continue
        fs = ctx.functions[s.id]
        if fs and support_set(mission.model, t, fs) < 1:
            continue
        out.add(s.id)
    for c in mission.constraints:
        if isinstance(c, ModelConstraint) and not _constraint_holds(mission, cand, c):
            out -= set(c.requirements)
    return frozenset(out)


def _presence(cand: SolutionCandidate, n: int) -> dict:
    """(location, k) -> atoms there at the k-th timepoint; atoms in transit are nowhere."""
    index = {t: i for i, t in enumerate(cand.order)}
    where: dict = {}
    for atom, visits in cand.timelines.items():
        seq = stays(visits, index)
        for i, st in enumerate(seq):
            end = st.end if i + 1 < len(seq) else n - 1
            for k in range(st.start, end + 1):
                where.setdefault((st.location, k), set()).add(atom)
    return where


def structures(mission: Mission, cand: SolutionCandidate) -> dict:
    """Coalition structure at every occupied (location, timepoint).

    Atoms bound to a requirement that demands functionalities form one
    composite while it is active; everything else is a singleton.
    """
    ctx = context(mission)
    index = {t: i for i, t in enumerate(cand.order)}
    n = len(cand.order)
    types = cand.atom_types
    out = {}
    for (loc, k), atoms in sorted(_presence(cand, n).items(), key=lambda kv: (kv[0][1], kv[0][0])):
        parent = {a: a for a in atoms}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for s in ctx.requirements:
            if s.location != loc or not ctx.functions[s.id] or s.id not in cand.assignments:
                continue
            if not index[s.start] <= k <= index[s.end]:
                continue
            members = [a for a in cand.assignments[s.id] if a in atoms]
            for a in members[1:]:
                parent[find(a)] = find(members[0])
        blocks: dict = {}
        for a in atoms:
            blocks.setdefault(find(a), []).append(AtomicAgent(a, types[a]))
        out[loc, k] = CoalitionStructure(blocks.values())
    return out


def reconfiguration(mission: Mission, cand: SolutionCandidate) -> dict:
    """Seconds of reconfiguration at each (location, k), charged against k-1.

    Only atoms that stay put are compared, and atoms that just arrived count
    as singletons in the earlier structure, so coupling on arrival is charged.
    """
    cs = structures(mission, cand)
    out = {}
    for (loc, k), now in cs.items():
        before = cs.get((loc, k - 1))
        present = now.pool
        kept = [b & present for b in before] if before is not None else []
        kept = [b for b in kept if b]
        covered = frozenset().union(*kept) if kept else frozenset()
        prev = CoalitionStructure(kept + [[a] for a in sorted(present - covered)])
        out[loc, k] = transition_cost(prev, now, mission.reconfig)
    return out


def horizon(mission: Mission, cand: SolutionCandidate) -> float:
    times = cand.times
    if not times:
        net, _ = timeline_network(mission, cand.timelines, cand.atom_types, cand.order)
        times = net.earliest
    return max(times.values(), default=0.0)


def active_atoms(mission: Mission, cand: SolutionCandidate) -> list[str]:
    """Atoms deployed beyond the starting assignment (bound elsewhere or carrying)."""
    ctx = context(mission)
    return sorted(a for a, visits in cand.timelines.items()
                  if any(v.purpose == CARRY or (v.purpose != START and not ctx.is_depot(v.purpose))
                         for v in visits))


def metrics(mission: Mission, cand: SolutionCandidate, flow: FeasibilityReport | None = None) -> Metrics:
    ctx = context(mission)
    ok = satisfied(mission, cand, flow)
    n = len(mission.requirements)
    sat = len(ok) / n if n else 1.0
    if not n:
        saf = 1.0
    elif not ok:
        saf = 0.0
    else:
        # the starting assignment is taken to survive with probability 1
        saf = min([1.0] + [reliability(mission.model, cand.assigned_type(s), ctx.functions[s])
                           for s in sorted(ok) if not ctx.is_depot(s)])
    reconf = sum(reconfiguration(mission, cand).values())
    op_time = horizon(mission, cand) + reconf
    used = GeneralAgentType.of(*(cand.atom_types[a] for a in active_atoms(mission, cand)))
    energy = ocost(mission.model, used, op_time) / J_PER_KWH
    return Metrics(energy, sat, saf, reconf, ok)


def cost(weights: Weights, energy: float, e_max: float, sat: float, saf: float) -> float:
    if e_max <= 0:
        raise DomainError(f"e_max must be > 0, got {e_max}")
    return weights.alpha * energy / e_max + weights.beta * sat + weights.epsilon * saf


def from_metrics(m: Metrics, weights: Weights, e_max: float) -> SolutionScore:
    return SolutionScore(m.energy, m.sat, m.saf, int(m.sat == 1.0), cost(weights, m.energy, e_max, m.sat, m.saf),
                         m.reconfig_total)


def score(mission: Mission, cand: SolutionCandidate, weights: Weights = Weights(), e_max: float = 1.0) -> SolutionScore:
    if e_max <= 0:
        raise DomainError(f"e_max must be > 0, got {e_max}")
    return from_metrics(metrics(mission, cand), weights, e_max)


def constellations(mission: Mission, cand: SolutionCandidate) -> list[dict]:
    """One row per occupied (location, timepoint): agents, safety and reconfiguration seconds."""
    ctx = context(mission)
    index = {t: i for i, t in enumerate(cand.order)}
    recon = reconfiguration(mission, cand)
    rows = []
    for (loc, k), cs in structures(mission, cand).items():
        active = [s for s in ctx.requirements if s.location == loc and s.id in cand.assignments
                  and index[s.start] <= k <= index[s.end]]
        safety = [1.0 if ctx.is_depot(s.id) else reliability(mission.model, cand.assigned_type(s.id),
                                                              ctx.functions[s.id]) for s in active]
        rows.append({
            "location": loc,
            "timepoint": cand.order[k],
            "requirements": [s.id for s in active],
            "agents": repr(cs),
            "safety": min(safety) if safety else None,
            "reconfiguration_s": recon[loc, k],
        })
    return rows

