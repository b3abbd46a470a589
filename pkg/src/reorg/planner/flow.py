"""Transport feasibility on a time-expanded graph.

Nodes are ``(location, k)`` for the k-th timepoint of the candidate's order.
Cargo may wait at a location for free.  Every relocation of a mobile atom is
an arc from its departure node to its arrival node whose capacity is the
atom's transport capacity.  Each relocation of an immobile atom is a demand
of ``tcon`` units, routed one at a time along a path with the fewest moves
(successive shortest paths, integral).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ..errors import UnknownProperty
from ..mission import Mission
from ..ontology import ResourceModel, resolve_property
from ..policies import pvalue_composite
from .model import SolutionCandidate, Visit


@dataclass(frozen=True)
class Stay:
    location: str
    start: int
    end: int
    purposes: tuple[str, ...]


@dataclass(frozen=True)
class MoveArc:
    carrier: str
    src: str
    a: int
    dst: str
    b: int
    capacity: float


@dataclass(frozen=True)
class Demand:
    atom: str
    weight: float
    src: str
    a: int
    dst: str
    b: int
    purposes: tuple[str, ...]  # requirements served on arrival


@dataclass
class FeasibilityReport:
    feasible: bool
    arcs: tuple[MoveArc, ...]
    load: list[float]
    routes: dict = field(default_factory=dict)  # atom -> list of (demand index, arc indices)
    violations: list[str] = field(default_factory=list)
    failed: list[Demand] = field(default_factory=list)

    def residual(self, i: int) -> float:
        return self.arcs[i].capacity - self.load[i]


def prop_or(model: ResourceModel, agent_type: str, name: str, default: float) -> float:
    try:
        return resolve_property(model, agent_type, name)
    except UnknownProperty:
        return default


def is_mobile(model: ResourceModel, agent_type: str) -> bool:
    return prop_or(model, agent_type, "v_nom", 0.0) > 0


def stays(visits: Iterable[Visit], index: Mapping[str, int]) -> list[Stay]:
    """Merge an atom's visits into maximal stays at one location."""
    out: list[Stay] = []
    for v in sorted(visits, key=lambda v: (index[v.start], index[v.end], v.purpose)):
        s, e = index[v.start], index[v.end]
        if out and out[-1].location == v.location:
            last = out[-1]
            out[-1] = Stay(last.location, last.start, max(last.end, e), last.purposes + (v.purpose,))
        else:
            out.append(Stay(v.location, s, e, (v.purpose,)))
    return out


def flow_problem(model: ResourceModel, timelines: Mapping[str, Sequence[Visit]], atom_types: Mapping[str, str],
                 index: Mapping[str, int]) -> tuple[list[MoveArc], list[Demand]]:
    arcs, demands = [], []
    for atom in sorted(timelines):
        t = atom_types[atom]
        seq = stays(timelines[atom], index)
        mobile = is_mobile(model, t)
        for prev, nxt in zip(seq, seq[1:]):
            if mobile:
                cap = pvalue_composite(model, {t: 1}, "tcap")
                arcs.append(MoveArc(atom, prev.location, prev.end, nxt.location, nxt.start, cap))
            else:
                w = prop_or(model, t, "tcon", 1.0)
                demands.append(Demand(atom, w, prev.location, prev.end, nxt.location, nxt.start, nxt.purposes))
    demands.sort(key=lambda d: (d.a, d.b, d.atom))
    return arcs, demands


def _shortest(arcs, out, load, d: Demand, n_points: int, capacitated: bool):
    """0-1 BFS from (src, a) to (dst, b); moves cost 1, waiting costs 0."""
    start, goal = (d.src, d.a), (d.dst, d.b)
    if d.a > d.b:
        return None
    best = {start: 0}
    back: dict = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            path = []
            while back[node] is not None:
                node, arc = back[node]
                if arc is not None:
                    path.append(arc)
            return path[::-1]
        loc, k = node
        steps = []
        if k + 1 <= d.b:
            steps.append(((loc, k + 1), None, 0))
        for i in out.get(node, ()):
            arc = arcs[i]
            if arc.b > d.b:
                continue
            if capacitated and arc.capacity - load[i] < d.weight:
                continue
            steps.append(((arc.dst, arc.b), i, 1))
        for nxt, arc_i, cost in steps:
            c = best[node] + cost
            if nxt not in best or c < best[nxt]:
                best[nxt] = c
                back[nxt] = (node, arc_i)
                if cost:
                    queue.append(nxt)
                else:
                    queue.appendleft(nxt)
    return None


def route(arcs: Sequence[MoveArc], demands: Sequence[Demand], order: Sequence[str]) -> FeasibilityReport:
    out: dict = {}
    for i, arc in enumerate(arcs):
        out.setdefault((arc.src, arc.a), []).append(i)
    load = [0.0] * len(arcs)
    report = FeasibilityReport(True, tuple(arcs), load)
    for di, d in enumerate(demands):
        path = _shortest(arcs, out, load, d, len(order), capacitated=True)
        if path is not None:
            for i in path:
                load[i] += d.weight
            report.routes.setdefault(d.atom, []).append((di, tuple(path)))
            continue
        report.feasible = False
        report.failed.append(d)
        free = _shortest(arcs, out, load, d, len(order), capacitated=False)
        what = f"{d.atom} from {d.src}@{order[d.a]} to {d.dst}@{order[d.b]}"
        if free is None:
            report.violations.append(f"no transport for {what}")
        else:
            i = next(i for i in free if arcs[i].capacity - load[i] < d.weight)
            arc = arcs[i]
            report.violations.append(
                f"arc {arc.src}@{order[arc.a]}->{arc.dst}@{order[arc.b]} carried by {arc.carrier}: "
                f"capacity {arc.capacity:g}, needed {load[i] + d.weight:g} (for {what})")
    return report


def check_flow(mission: Mission, candidate: SolutionCandidate) -> FeasibilityReport:
    """Route every immobile relocation of ``candidate`` over its mobile agents' moves."""
    index = {t: i for i, t in enumerate(candidate.order)}
    arcs, demands = flow_problem(mission.model, candidate.timelines, candidate.atom_types, index)
    return route(arcs, demands, candidate.order)
