"""Candidate generation: type selection, atom binding, routing and repair.

A candidate is built in four passes:

1. every requirement gets a smallest general agent type that contains the
   demanded cardinalities and, when functionalities are demanded, supports
   them with a physically linkable composite;
2. atoms are bound to requirements in temporal order, never placing one atom
   at two locations at once;
3. requirements that are mutually exclusive (they may overlap in time at
   different locations) receive up to ``psi_m`` extra mobile and ``psi_im``
   extra immobile atoms;
4. immobile relocations are routed over the mobile atoms' moves and travel
   times are added to the temporal network.  A failure first tries to
   dispatch an idle mobile atom as carrier, and otherwise drops the
   requirement that could not be reached.
"""
from __future__ import annotations

import random
from types import MappingProxyType
from typing import Mapping

from ..agents import GeneralAgentType, connection_feasible, instantiate, sub_multisets
from ..capability import support_set
from ..errors import NoCandidate, ValidationError
from ..mission import (
    Edge,
    Mission,
    ModelConstraint,
    can_overlap,
    check_network,
    check_temporal_consistency,
    disequality_edges,
    distance,
    mission_edges,
)
from .flow import flow_problem, is_mobile, prop_or, route, stays
from .model import Bounds, SolutionCandidate, Visit

START = "start"
CARRY = "carry"


class PlanningContext:
    """Everything about a mission that does not depend on the seed."""

    def __init__(self, mission: Mission):
        report = check_temporal_consistency(mission)
        if not report.consistent:
            raise ValidationError("mission is temporally inconsistent: " + report.describe())
        self.mission = mission
        self.model = mission.model
        self.order = report.order
        self.index = {t: i for i, t in enumerate(self.order)}
        self.order_edges = [Edge(b, a, 0.0, False, f"committed order {a} <= {b}")
                            for a, b in zip(self.order, self.order[1:])]
        self.requirements = sorted(mission.requirements,
                                   key=lambda s: (self.index[s.start], self.index[s.end], s.id))
        self.depot_sids = frozenset(s.id for s in mission.requirements if s.start == mission.t0)
        if self.requirements:
            first = [s for s in self.requirements if s.start == mission.t0] or self.requirements
            self.depot = first[0].location
        else:
            self.depot = next(iter(mission.locations), "")
        self.atoms = instantiate(mission.pool)
        self.atom_types = MappingProxyType({a.id: a.type for a in self.atoms})
        self.by_type: dict[str, list[str]] = {}
        for a in self.atoms:
            self.by_type.setdefault(a.type, []).append(a.id)
        self.mobile = {t: is_mobile(self.model, t) for t in mission.pool}

        model_cons = [c for c in mission.constraints if isinstance(c, ModelConstraint)]
        self.functions: dict[str, tuple[str, ...]] = {}
        self.needed: dict[str, GeneralAgentType] = {}
        self.caps: dict[str, dict[str, int]] = {}
        self.distinct: dict[str, list[ModelConstraint]] = {}
        self.preferred: dict[str, set[str]] = {}
        for s in mission.requirements:
            fs = set(s.functionalities)
            counts = dict(s.agents)
            caps: dict[str, int] = {}
            for c in model_cons:
                if s.id not in c.requirements:
                    continue
                if c.kind == "minFunc":
                    fs.add(c.functionality)
                elif c.kind == "minCard":
                    counts[c.type] = max(counts.get(c.type, 0), int(c.value))
                elif c.kind == "maxCard":
                    caps[c.type] = min(caps.get(c.type, int(c.value)), int(c.value))
                elif c.kind == "allDistinct":
                    self.distinct.setdefault(s.id, []).append(c)
                elif c.kind in ("allEqual", "minEqual"):
                    self.preferred.setdefault(s.id, set()).update(c.roles)
            self.functions[s.id] = tuple(sorted(fs))
            self.needed[s.id] = GeneralAgentType(counts)
            self.caps[s.id] = caps
        self.exclusive = {
            s.id: any(o.location != s.location and can_overlap(mission, s, o)
                      for o in mission.requirements if o.id != s.id)
            for s in mission.requirements
        }
        self._ext: dict[str, list[GeneralAgentType]] = {}
        self._ok: dict = {}

    def is_depot(self, sid: str) -> bool:
        return sid in self.depot_sids

    def type_ok(self, t: GeneralAgentType, fs) -> bool:
        key = (t, fs)
        if key not in self._ok:
            self._ok[key] = (not fs or support_set(self.model, t, fs) >= 1) and connection_feasible(self.model, t)
        return self._ok[key]

    def within_caps(self, sid: str, t: GeneralAgentType) -> bool:
        return all(t.get(k, 0) <= v for k, v in self.caps[sid].items())

    def extensions(self, sid: str) -> list[GeneralAgentType]:
        """All smallest admissible types for ``sid``; empty when none exists."""
        if sid in self._ext:
            return self._ext[sid]
        base, fs = self.needed[sid], self.functions[sid]
        pool = GeneralAgentType(self.mission.pool)
        out: list[GeneralAgentType] = []
        if pool.contains(base) and self.within_caps(sid, base):
            if not fs:
                out = [base]
            else:
                rest = pool - base
                options = [GeneralAgentType()] + list(sub_multisets(rest, rest.size))
                options.sort(key=lambda x: (x.size, x.key()))
                size = None
                for extra in options:
                    if size is not None and extra.size > size:
                        break
                    t = base | extra
                    if self.within_caps(sid, t) and self.type_ok(t, fs):
                        out.append(t)
                        size = extra.size
        self._ext[sid] = out
        return out


def context(mission: Mission) -> PlanningContext:
    # cached on the (frozen) mission instance
    ctx = mission.__dict__.get("_planning_context")
    if ctx is None:
        ctx = PlanningContext(mission)
        object.__setattr__(mission, "_planning_context", ctx)
    return ctx


class _Builder:
    def __init__(self, ctx: PlanningContext, rng: random.Random):
        self.ctx = ctx
        self.rng = rng
        t0 = ctx.mission.t0
        self.timelines: dict[str, list[Visit]] = {a: [Visit(ctx.depot, t0, t0, START)] for a in ctx.atom_types}
        self.assignments: dict[str, list[str]] = {}
        self.notes: list[str] = []
        self.forbidden: set = set()

    # -- binding ------------------------------------------------------------

    def fits(self, atom: str, s) -> bool:
        idx = self.ctx.index
        ss, se = idx[s.start], idx[s.end]
        for v in self.timelines[atom]:
            if v.location == s.location:
                continue
            vs, ve = idx[v.start], idx[v.end]
            if vs < se and ss < ve:
                return False  # somewhere else at the same time
            if ve == ss or se == vs:
                return False  # no time left to travel
        return True

    def located_at(self, atom: str, location: str, k: int) -> bool:
        idx = self.ctx.index
        before = [v for v in self.timelines[atom] if idx[v.end] <= k]
        return bool(before) and max(before, key=lambda v: idx[v.end]).location == location

    def bind(self, s, t: GeneralAgentType, taken=()) -> list[str] | None:
        ctx = self.ctx
        excluded = set(taken)
        for c in ctx.distinct.get(s.id, ()):
            for other in c.requirements:
                if other != s.id:
                    excluded.update(a for a in self.assignments.get(other, ()) if ctx.atom_types[a] == c.type)
        preferred = ctx.preferred.get(s.id, set())
        chosen = []
        for name, n in t.items():
            free = [a for a in ctx.by_type.get(name, ()) if a not in excluded and self.fits(a, s)]
            if len(free) < n:
                return None
            k = ctx.index[s.start]
            free.sort(key=lambda a: (a not in preferred, not self.located_at(a, s.location, k), self.rng.random()))
            chosen += free[:n]
        return chosen

    def attach(self, s, atoms):
        self.assignments.setdefault(s.id, []).extend(atoms)
        for a in atoms:
            self.timelines[a].append(Visit(s.location, s.start, s.end, s.id))

    def drop(self, sid: str, why: str):
        self.assignments.pop(sid, None)
        for a, visits in self.timelines.items():
            self.timelines[a] = [v for v in visits if v.purpose != sid]
        self.notes.append(f"dropped {sid}: {why}")

    # -- repair -------------------------------------------------------------

    def dispatch(self, d) -> bool:
        """Send an idle mobile atom to carry demand ``d``."""
        ctx = self.ctx
        order = ctx.order
        mobiles = [a for a in ctx.atom_types if ctx.mobile[ctx.atom_types[a]]]
        self.rng.shuffle(mobiles)
        for m in sorted(mobiles, key=lambda a: -prop_or(ctx.model, ctx.atom_types[a], "tcap", 0.0)):
            if (m, d) in self.forbidden:
                continue
            if prop_or(ctx.model, ctx.atom_types[m], "tcap", 0.0) < d.weight:
                continue
            slot = self._slot(stays(self.timelines[m], ctx.index), d)
            if slot is None:
                continue
            k, j = slot
            self.forbidden.add((m, d))
            self.timelines[m] += [Visit(d.src, order[k], order[k], CARRY), Visit(d.dst, order[j], order[j], CARRY)]
            return True
        return False

    @staticmethod
    def _slot(seq, d):
        """Earliest pickup k and drop-off j (cargo waits at either end) that fit between two stays."""
        for k in range(d.a, d.b):
            for j in range(k + 1, d.b + 1):
                for p in range(-1, len(seq)):
                    prev = seq[p] if p >= 0 else None
                    nxt = seq[p + 1] if p + 1 < len(seq) else None
                    if prev is not None and (prev.end > k or (prev.end == k and prev.location != d.src)):
                        continue
                    if nxt is not None and (nxt.start < j or (nxt.start == j and nxt.location != d.dst)):
                        continue
                    return k, j
        return None

    def swap(self, d) -> bool:
        """Replace the stranded atom of ``d`` by an untried one of the same type."""
        ctx = self.ctx
        sids = self.requirement_ids(d.purposes)
        if len(sids) != 1 or d.atom not in self.assignments.get(sids[0], ()):
            return False
        s = ctx.mission.requirement(sids[0])
        self.forbidden.add((d.atom, s.id))
        assigned = self.assignments[s.id]
        rest = [a for a in assigned if a != d.atom]
        name = ctx.atom_types[d.atom]
        options = [a for a in (self.bind(s, GeneralAgentType({name: 1}), taken=assigned) or ())
                   if (a, s.id) not in self.forbidden]
        if not options:
            return False
        new = options[0]
        self.forbidden.add((new, s.id))
        self.assignments[s.id] = rest + [new]
        self.timelines[d.atom] = [v for v in self.timelines[d.atom] if v.purpose != s.id]
        self.timelines[new].append(Visit(s.location, s.start, s.end, s.id))
        self.notes.append(f"swapped {d.atom} for {new} in {s.id}")
        return True

    def requirement_ids(self, purposes) -> list[str]:
        return [p for p in purposes if p not in (START, CARRY)]

    def repair(self):
        ctx = self.ctx
        for _ in range(4 * len(ctx.requirements) + 4 * len(ctx.atom_types) + 8):
            arcs, demands = flow_problem(ctx.model, self.timelines, ctx.atom_types, ctx.index)
            report = route(arcs, demands, ctx.order)
            if not report.feasible:
                d = report.failed[0]
                if self.dispatch(d) or self.swap(d):
                    continue
                for sid in self.requirement_ids(d.purposes):
                    self.drop(sid, report.violations[0])
                continue
            net, travel = timeline_network(ctx.mission, self.timelines, ctx.atom_types, ctx.order)
            if net.consistent:
                return net
            culprits = [travel[r] for r in net.reasons if r in travel]
            atom, stay = culprits[0] if culprits else (None, None)
            sids = self.requirement_ids(stay.purposes) if stay else [s for s in self.assignments
                                                                    if not ctx.is_depot(s)]
            if sids:
                for sid in sids:
                    self.drop(sid, "travel time does not fit: " + "; ".join(net.reasons))
            else:
                # an unreachable carry stop: withdraw the detour
                self.timelines[atom] = [v for v in self.timelines[atom]
                                        if not (v.purpose == CARRY and v.location == stay.location)]
        raise NoCandidate("repair did not converge")


def timeline_network(mission: Mission, timelines: Mapping, atom_types: Mapping, order):
    """Mission network plus the committed order and one travel bound per mobile move.

    Returns the consistency report and a map from travel-edge reason to
    ``(atom, destination stay)``.
    """
    index = {t: i for i, t in enumerate(order)}
    model = mission.model
    extra = [Edge(b, a, 0.0, False, f"committed order {a} <= {b}") for a, b in zip(order, order[1:])]
    travel = {}
    for atom in sorted(timelines):
        t = atom_types[atom]
        if not is_mobile(model, t):
            continue
        v = prop_or(model, t, "v_nom", 0.0)
        seq = stays(timelines[atom], index)
        for prev, nxt in zip(seq, seq[1:]):
            d = distance(mission.locations[prev.location], mission.locations[nxt.location])
            why = f"{atom} travels {prev.location}->{nxt.location} ({d / v:.0f} s)"
            a, b = order[prev.end], order[nxt.start]
            extra += [Edge(b, a, -d / v, False, why), Edge(b, a, 0.0, True, why)]
            travel[why] = (atom, nxt)
    extra += disequality_edges(mission, order)
    return check_network(order, mission.t0, mission_edges(mission, extra)), travel


def generate_candidate(mission: Mission, bounds: Bounds = Bounds(), seed: int = 0) -> SolutionCandidate:
    ctx = context(mission)
    rng = random.Random(seed)
    b = _Builder(ctx, rng)

    for s in ctx.requirements:
        options = list(ctx.extensions(s.id))
        if not options:
            b.notes.append(f"dropped {s.id}: no admissible agent type in the pool")
            continue
        rng.shuffle(options)
        for t in options:
            atoms = b.bind(s, t)
            if atoms is not None:
                b.attach(s, atoms)
                break
        else:
            b.notes.append(f"dropped {s.id}: required agents are busy elsewhere")

    # redundancy for mutually exclusive requirements, drawn from a separate
    # stream so the base assignment does not depend on the bounds
    for s in ctx.requirements:
        fs = ctx.functions[s.id]
        if s.id not in b.assignments or not fs or not ctx.exclusive[s.id]:
            continue
        xr = random.Random(f"{seed}/extras/{s.id}")
        for mobile, psi in ((True, bounds.psi_m), (False, bounds.psi_im)):
            kinds = sorted(t for t in mission.pool if ctx.mobile[t] == mobile)
            for _ in range(xr.randint(0, psi) if psi else 0):
                if not kinds:
                    break
                name = xr.choice(kinds)
                current = GeneralAgentType.of(*(ctx.atom_types[a] for a in b.assignments[s.id]))
                grown = current | {name: 1}
                if not ctx.within_caps(s.id, grown) or not ctx.type_ok(grown, fs):
                    continue
                atoms = b.bind(s, GeneralAgentType({name: 1}), taken=b.assignments[s.id])
                if atoms:
                    b.attach(s, atoms)

    net = b.repair()
    if ctx.requirements and not b.assignments:
        raise NoCandidate("no requirement can be covered: " + "; ".join(b.notes))

    idx = ctx.index
    return SolutionCandidate(
        assignments=MappingProxyType({k: tuple(sorted(v)) for k, v in sorted(b.assignments.items())}),
        timelines=MappingProxyType({
            a: tuple(sorted(set(vs), key=lambda v: (idx[v.start], idx[v.end], v.purpose, v.location)))
            for a, vs in sorted(b.timelines.items())
        }),
        order=ctx.order,
        atom_types=ctx.atom_types,
        times=MappingProxyType(dict(net.earliest)),
        notes=tuple(b.notes),
    )
