"""Missions: spatio-temporal requirements, constraints, timepoints and locations.

Temporal reasoning works on a simple temporal network.  Every constraint is an
edge ``t_v - t_u <= w`` (or ``< w`` when strict).  Weights are kept as
``(w, -strict_count)`` pairs and summed lexicographically.  A cycle is then
contradictory exactly when its pair is below ``(0, 0)``, so strictness needs
no epsilon guess.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Iterable, Mapping, Sequence

import yaml

from .agents import GeneralAgentType, Role, instantiate
from .errors import DomainError, ParseError, ValidationError
from .ontology import ResourceModel
from .reconfig import ReconfigParams

RADIUS = {"moon": 1_737_400.0, "earth": 6_378_137.0}

# relation keyword -> subset of {<, =, >}
RELATIONS = {
    "<": frozenset("<"),
    "<=": frozenset("<="),
    "=": frozenset("="),
    "==": frozenset("="),
    ">=": frozenset(">="),
    ">": frozenset(">"),
    "!=": frozenset("<>"),
    "any": frozenset("<=>"),
    "none": frozenset(),
}
CARD_KINDS = ("minCard", "maxCard")
DISTINCT_KINDS = ("allDistinct", "minDistinct", "maxDistinct")
EQUAL_KINDS = ("allEqual", "minEqual", "maxEqual")
PROP_KINDS = ("minProp", "maxProp")
MODEL_KINDS = CARD_KINDS + DISTINCT_KINDS + EQUAL_KINDS + PROP_KINDS + ("minFunc",)


@dataclass(frozen=True)
class Location:
    id: str
    lat: float
    lon: float
    body: str = "moon"


@dataclass(frozen=True)
class SpatioTemporalRequirement:
    id: str
    functionalities: tuple[str, ...]
    agents: GeneralAgentType
    location: str
    start: str
    end: str

    def __str__(self):
        fs = "{" + ",".join(self.functionalities) + "}" if self.functionalities else "{}"
        return f"{self.id}: ({fs},{self.agents!r})@({self.location},[{self.start},{self.end}])"


@dataclass(frozen=True)
class TemporalConstraint:
    lhs: str
    rel: frozenset
    rhs: str


@dataclass(frozen=True)
class DurationConstraint:
    """``to - from`` at least (minDuration) or at most (maxDuration) ``seconds``."""

    kind: str
    start: str
    end: str
    seconds: float


@dataclass(frozen=True)
class ModelConstraint:
    kind: str
    requirements: tuple[str, ...]
    type: str | None = None
    value: float | None = None
    roles: tuple[str, ...] = ()
    functionality: str | None = None
    prop: str | None = None


Constraint = TemporalConstraint | DurationConstraint | ModelConstraint


@dataclass(frozen=True)
class Mission:
    pool: GeneralAgentType
    requirements: tuple[SpatioTemporalRequirement, ...]
    constraints: tuple[Constraint, ...]
    timepoints: tuple[str, ...]
    locations: Mapping[str, Location]
    model: ResourceModel = field(compare=False, repr=False)
    reconfig: ReconfigParams = ReconfigParams()
    name: str = ""

    @property
    def t0(self) -> str:
        return self.timepoints[0]

    def requirement(self, sid: str) -> SpatioTemporalRequirement:
        for s in self.requirements:
            if s.id == sid:
                return s
        raise KeyError(sid)

    def roles(self) -> list[Role]:
        """One role per pool atom, named after the atom."""
        return [Role(a.id, a.type) for a in instantiate(self.pool)]


# ---------------------------------------------------------------------------
# parsing


def _need(mapping, key, path):
    if key not in mapping:
        raise ValidationError(f"missing field {key!r}", path)
    return mapping[key]


def _relation(raw, path) -> frozenset:
    if isinstance(raw, str):
        if raw not in RELATIONS:
            raise ValidationError(f"unknown relation {raw!r}", path)
        return RELATIONS[raw]
    if isinstance(raw, (list, tuple)) and all(r in ("<", "=", ">") for r in raw):
        return frozenset(raw)
    raise ValidationError(f"relation must be a keyword or a list of '<', '=', '>', got {raw!r}", path)


def _rel_text(rel: frozenset) -> str | list:
    for key, value in RELATIONS.items():
        if value == rel and key != "==":
            return key
    return sorted(rel)


def _counts(raw, path) -> GeneralAgentType:
    if raw is None:
        return GeneralAgentType()
    if not isinstance(raw, Mapping):
        raise ValidationError("agent counts must be a mapping of type to count", path)
    try:
        return GeneralAgentType({str(k): v for k, v in raw.items()})
    except ValueError as exc:
        raise ValidationError(str(exc), path) from None


def _parse_constraint(raw, path, tp, sids, role_names, model) -> Constraint:
    if not isinstance(raw, Mapping):
        raise ValidationError("constraint must be a mapping", path)
    kind = _need(raw, "kind", path)

    def point(key):
        t = _need(raw, key, path)
        if t not in tp:
            raise ValidationError(f"unknown timepoint {t!r}", f"{path}.{key}")
        return t

    if kind == "temporal":
        return TemporalConstraint(point("lhs"), _relation(_need(raw, "rel", path), f"{path}.rel"), point("rhs"))
    if kind in ("minDuration", "maxDuration"):
        d = float(_need(raw, "seconds", path))
        if d < 0 or not math.isfinite(d):
            raise ValidationError(f"duration must be finite and >= 0, got {d}", f"{path}.seconds")
        return DurationConstraint(kind, point("from"), point("to"), d)
    if kind not in MODEL_KINDS:
        raise ValidationError(f"unknown constraint kind {kind!r}", path)

    strs = raw.get("str", raw.get("requirement"))
    strs = [strs] if isinstance(strs, str) else list(strs or [])
    if not strs:
        raise ValidationError("constraint names no requirement", f"{path}.str")
    for s in strs:
        if s not in sids:
            raise ValidationError(f"unknown requirement {s!r}", f"{path}.str")
    out: dict[str, Any] = {"kind": kind, "requirements": tuple(strs)}
    if kind in CARD_KINDS + DISTINCT_KINDS:
        out["type"] = str(_need(raw, "type", path))
        if out["type"] not in model.agent_types:
            raise ValidationError(f"unknown agent type {out['type']!r}", f"{path}.type")
    if kind in CARD_KINDS + ("minDistinct", "maxDistinct", "minEqual", "maxEqual") + PROP_KINDS:
        value = float(_need(raw, "value", path))
        if kind not in PROP_KINDS and (value < 0 or value != int(value)):
            raise ValidationError(f"value must be a non-negative integer, got {value}", f"{path}.value")
        out["value"] = value
    if kind in EQUAL_KINDS:
        roles = tuple(_need(raw, "roles", path))
        for r in roles:
            if r not in role_names:
                raise ValidationError(f"unknown role {r!r}", f"{path}.roles")
        out["roles"] = roles
    if kind == "minFunc" or (kind in PROP_KINDS and "functionality" in raw):
        f = str(_need(raw, "functionality", path))
        if f not in model.functionalities:
            raise ValidationError(f"unknown functionality {f!r}", f"{path}.functionality")
        out["functionality"] = f
    if kind in PROP_KINDS:
        out["prop"] = str(_need(raw, "property", path))
    return ModelConstraint(**out)


def parse_mission(document: str | Mapping[str, Any], model: ResourceModel) -> Mission:
    """Build a fully cross-checked :class:`Mission` from a document or YAML text."""
    if isinstance(document, str):
        try:
            document = yaml.safe_load(document)
        except yaml.YAMLError as exc:
            raise ParseError(f"malformed mission document: {exc}") from exc
    if not isinstance(document, Mapping):
        raise ParseError("mission document must be a mapping at top level")
    allowed = {"name", "pool", "requirements", "constraints", "timepoints", "locations", "reconfig"}
    unknown = set(document) - allowed
    if unknown:
        raise ValidationError(f"unknown top-level sections {sorted(unknown)}")

    pool = _counts(_need(document, "pool", "pool"), "pool")
    for name in pool:
        if name not in model.agent_types:
            raise ValidationError(f"unknown agent type {name!r}", f"pool.{name}")

    timepoints = document.get("timepoints") or []
    if not isinstance(timepoints, list) or not timepoints:
        raise ValidationError("at least one timepoint is required", "timepoints")
    timepoints = tuple(str(t) for t in timepoints)
    if len(set(timepoints)) != len(timepoints):
        raise ValidationError("duplicate timepoint ids", "timepoints")
    tp = set(timepoints)

    locations = {}
    for lid, raw in (document.get("locations") or {}).items():
        path = f"locations.{lid}"
        if not isinstance(raw, Mapping):
            raise ValidationError("location must be a mapping", path)
        body = str(raw.get("body", "moon"))
        if body not in RADIUS:
            raise ValidationError(f"unknown body {body!r}; known: {sorted(RADIUS)}", f"{path}.body")
        loc = Location(str(lid), float(_need(raw, "lat", path)), float(_need(raw, "lon", path)), body)
        if not abs(loc.lat) < 90 or not math.isfinite(loc.lon):
            raise ValidationError(f"latitude must lie strictly between -90 and 90, got {loc.lat}", f"{path}.lat")
        locations[str(lid)] = loc

    requirements = []
    for i, raw in enumerate(document.get("requirements") or []):
        path = f"requirements[{i}]"
        if not isinstance(raw, Mapping):
            raise ValidationError("requirement must be a mapping", path)
        sid = str(_need(raw, "id", path))
        fs = tuple(sorted(set(raw.get("functions") or [])))
        for f in fs:
            if f not in model.functionalities:
                raise ValidationError(f"unknown functionality {f!r}", f"{path}.functions")
        agents = _counts(raw.get("agents"), f"{path}.agents")
        for name in agents:
            if name not in model.agent_types:
                raise ValidationError(f"unknown agent type {name!r}", f"{path}.agents")
        loc = str(_need(raw, "location", path))
        if loc not in locations:
            raise ValidationError(f"unknown location {loc!r}", f"{path}.location")
        start, end = str(_need(raw, "from", path)), str(_need(raw, "to", path))
        for key, t in (("from", start), ("to", end)):
            if t not in tp:
                raise ValidationError(f"unknown timepoint {t!r}", f"{path}.{key}")
        if start == end:
            raise ValidationError(f"interval [{start},{end}] is empty: start must precede end", path)
        requirements.append(SpatioTemporalRequirement(sid, fs, agents, loc, start, end))
    sids = [s.id for s in requirements]
    if len(set(sids)) != len(sids):
        raise ValidationError("duplicate requirement ids", "requirements")

    role_names = {a.id for a in instantiate(pool)}
    constraints = tuple(
        _parse_constraint(raw, f"constraints[{i}]", tp, set(sids), role_names, model)
        for i, raw in enumerate(document.get("constraints") or [])
    )

    rc = document.get("reconfig") or {}
    if not isinstance(rc, Mapping):
        raise ValidationError("must be a mapping", "reconfig")
    try:
        reconfig = ReconfigParams(float(rc.get("t_a", 600.0)), float(rc.get("t_b", 100.0)))
    except DomainError as exc:
        raise ValidationError(str(exc), "reconfig") from None

    return Mission(pool, tuple(requirements), constraints, timepoints, MappingProxyType(locations), model,
                   reconfig, str(document.get("name", "")))


def load_mission_file(path, model: ResourceModel) -> Mission:
    with open(path, encoding="utf-8") as fh:
        return parse_mission(fh.read(), model)


def mission_document(mission: Mission) -> dict:
    """Plain-data form of ``mission``; ``parse_mission`` reads it back unchanged."""
    cons = []
    for c in mission.constraints:
        if isinstance(c, TemporalConstraint):
            cons.append({"kind": "temporal", "lhs": c.lhs, "rel": _rel_text(c.rel), "rhs": c.rhs})
        elif isinstance(c, DurationConstraint):
            cons.append({"kind": c.kind, "from": c.start, "to": c.end, "seconds": c.seconds})
        else:
            entry: dict[str, Any] = {"kind": c.kind, "str": list(c.requirements)}
            if c.type is not None:
                entry["type"] = c.type
            if c.value is not None:
                entry["value"] = c.value
            if c.roles:
                entry["roles"] = list(c.roles)
            if c.functionality is not None:
                entry["functionality"] = c.functionality
            if c.prop is not None:
                entry["property"] = c.prop
            cons.append(entry)
    doc = {
        "pool": dict(mission.pool),
        "timepoints": list(mission.timepoints),
        "locations": {l.id: {"lat": l.lat, "lon": l.lon, "body": l.body} for l in mission.locations.values()},
        "requirements": [
            {"id": s.id, "functions": list(s.functionalities), "agents": dict(s.agents),
             "location": s.location, "from": s.start, "to": s.end}
            for s in mission.requirements
        ],
        "constraints": cons,
        "reconfig": {"t_a": mission.reconfig.t_a, "t_b": mission.reconfig.t_b},
    }
    if mission.name:
        doc["name"] = mission.name
    return doc


def dump_mission(mission: Mission) -> str:
    return yaml.safe_dump(mission_document(mission), sort_keys=False)


# ---------------------------------------------------------------------------
# temporal network


@dataclass(frozen=True)
class Edge:
    """``t[v] - t[u] <= w``, strictly when ``strict``."""

    u: str
    v: str
    w: float
    strict: bool
    why: str


@dataclass
class ConsistencyReport:
    consistent: bool
    witness: tuple[str, ...] = ()
    reasons: tuple[str, ...] = ()
    order: tuple[str, ...] = ()
    earliest: dict = field(default_factory=dict)
    schedule: dict = field(default_factory=dict)

    def __bool__(self):
        return self.consistent

    def describe(self) -> str:
        if self.consistent:
            return "consistent: " + " <= ".join(self.order)
        cycle = " -> ".join(self.witness)
        return "inconsistent: cycle " + cycle + ("; " + "; ".join(self.reasons) if self.reasons else "")


def _order_edges(a: str, b: str, why: str) -> list[Edge]:
    """a < b"""
    return [Edge(b, a, 0.0, True, why)]


def mission_edges(mission: Mission, extra: Iterable[Edge] = ()) -> list[Edge]:
    edges: list[Edge] = []
    t0 = mission.t0
    for t in mission.timepoints[1:]:
        edges += _order_edges(t0, t, f"{t0} is the earliest timepoint")
    for s in mission.requirements:
        edges += _order_edges(s.start, s.end, f"{s.id} starts before it ends")
    for c in mission.constraints:
        if isinstance(c, TemporalConstraint):
            why = f"{c.lhs} {_rel_text(c.rel)} {c.rhs}"
            if not c.rel:
                # empty relation: contradiction; a zero-length strict self-loop encodes it
                edges.append(Edge(c.lhs, c.lhs, 0.0, True, why))
            elif c.rel == frozenset("<"):
                edges += _order_edges(c.lhs, c.rhs, why)
            elif c.rel == frozenset(">"):
                edges += _order_edges(c.rhs, c.lhs, why)
            elif c.rel == frozenset("<="):
                edges.append(Edge(c.rhs, c.lhs, 0.0, False, why))
            elif c.rel == frozenset(">="):
                edges.append(Edge(c.lhs, c.rhs, 0.0, False, why))
            elif c.rel == frozenset("="):
                edges += [Edge(c.rhs, c.lhs, 0.0, False, why), Edge(c.lhs, c.rhs, 0.0, False, why)]
            # '!=' and the universal relation add no simple-temporal edge
        elif isinstance(c, DurationConstraint):
            why = f"{c.kind}({c.start},{c.end},{c.seconds:g})"
            edges += _order_edges(c.start, c.end, why)
            if c.kind == "minDuration":
                edges.append(Edge(c.end, c.start, -c.seconds, False, why))
            else:
                edges.append(Edge(c.start, c.end, c.seconds, False, why))
    edges.extend(extra)
    return edges


def _bellman_ford(points: Sequence[str], edges: Sequence[Edge], weight):
    """Distances from a virtual source joined to every point, or a negative cycle."""
    zero = weight(None)
    dist = {p: zero for p in points}
    pred: dict[str, Edge] = {}
    last = None
    for _ in range(len(points) + 1):
        last = None
        for e in edges:
            cand = _add(dist[e.u], weight(e))
            if cand < dist[e.v]:
                dist[e.v] = cand
                pred[e.v] = e
                last = e.v
        if last is None:
            return dist, None
    # walk back into the cycle
    node = last
    for _ in range(len(points)):
        node = pred[node].u
    cycle = []
    cur = node
    while True:
        e = pred[cur]
        cycle.append(e)
        cur = e.u
        if cur == node:
            break
    cycle.reverse()
    return None, cycle


def _add(a, b):
    if isinstance(a, tuple):
        return (a[0] + b[0], a[1] + b[1])
    return a + b


def _lex_weight(e):
    return (0.0, 0) if e is None else (e.w, -1 if e.strict else 0)


def _distances_to(target: str, points: Sequence[str], edges: Sequence[Edge], weight) -> dict:
    """Shortest path weight from every point to ``target`` (absent when unreachable)."""
    inf = math.inf
    dist = {p: inf for p in points}
    dist[target] = 0.0
    for _ in range(len(points)):
        changed = False
        for e in edges:
            if dist[e.v] < inf and dist[e.v] + weight(e) < dist[e.u]:
                dist[e.u] = dist[e.v] + weight(e)
                changed = True
        if not changed:
            break
    return dist


def check_network(points: Sequence[str], t0: str, edges: Sequence[Edge]) -> ConsistencyReport:
    points = list(points)
    known = set(points)
    for e in edges:
        if e.u not in known or e.v not in known:
            raise ValidationError(f"edge {e.why!r} references an unknown timepoint")
    _, cycle = _bellman_ford(points, edges, _lex_weight)
    if cycle is not None:
        witness = tuple([cycle[0].u] + [e.v for e in cycle])
        reasons = tuple(dict.fromkeys(e.why for e in cycle))
        return ConsistencyReport(False, witness, reasons)

    # earliest times ignoring strictness
    to_t0 = _distances_to(t0, points, edges, lambda e: e.w)
    earliest = {p: max(0.0, -to_t0[p]) if to_t0[p] < math.inf else 0.0 for p in points}
    # a schedule honouring strict edges: tighten them by delta until consistent
    delta = 1.0
    for _ in range(64):
        tight = lambda e, d=delta: e.w - d if e.strict else e.w
        _, bad = _bellman_ford(points, edges, lambda e: 0.0 if e is None else tight(e))
        if bad is None:
            break
        delta /= 2
    dist = _distances_to(t0, points, edges, tight)
    schedule = {p: max(0.0, -dist[p]) if dist[p] < math.inf else 0.0 for p in points}
    position = {p: i for i, p in enumerate(points)}
    order = tuple(sorted(points, key=lambda p: (schedule[p], position[p])))
    return ConsistencyReport(True, order=order, earliest=earliest, schedule=schedule)


MAX_DISEQUALITIES = 12


def _disequalities(mission: Mission) -> list[TemporalConstraint]:
    return [c for c in mission.constraints if isinstance(c, TemporalConstraint) and c.rel == frozenset("<>")]


def disequality_edges(mission: Mission, order: Sequence[str]) -> list[Edge]:
    """Strict edges resolving every '!=' constraint in the direction of ``order``."""
    pos = {t: i for i, t in enumerate(order)}
    out = []
    for c in _disequalities(mission):
        a, b = (c.lhs, c.rhs) if pos[c.lhs] < pos[c.rhs] else (c.rhs, c.lhs)
        out += _order_edges(a, b, f"{c.lhs} != {c.rhs}")
    return out


def check_temporal_consistency(mission: Mission, extra: Iterable[Edge] = ()) -> ConsistencyReport:
    """Consistency of the mission network.

    Each '!=' constraint is a choice between '<' and '>'; the choices are
    tried in order and the first consistent one is reported.
    """
    base = mission_edges(mission, extra)
    diseq = _disequalities(mission)
    if len(diseq) > MAX_DISEQUALITIES:
        raise ValidationError(f"{len(diseq)} '!=' constraints exceed the limit of {MAX_DISEQUALITIES}")
    first = None
    for choice in itertools.product((False, True), repeat=len(diseq)):
        branch = []
        for c, flip in zip(diseq, choice):
            a, b = (c.rhs, c.lhs) if flip else (c.lhs, c.rhs)
            branch += _order_edges(a, b, f"{c.lhs} != {c.rhs}")
        report = check_network(mission.timepoints, mission.t0, base + branch)
        if report.consistent:
            return report
        first = first or report
    return first


def can_overlap(mission: Mission, a: SpatioTemporalRequirement, b: SpatioTemporalRequirement) -> bool:
    """Whether the intervals of ``a`` and ``b`` may share time under the network.

    Both intervals are open-ended at the shared instant, so they overlap when
    each starts strictly before the other ends in some consistent assignment.
    """
    probe = _order_edges(b.start, a.end, "probe") + _order_edges(a.start, b.end, "probe")
    return check_temporal_consistency(mission, probe).consistent


# ---------------------------------------------------------------------------
# geometry


def project_location(loc: Location | tuple) -> tuple[float, float]:
    """Mercator coordinates in metres on the location's body."""
    if not isinstance(loc, Location):
        lat, lon, *rest = loc
        loc = Location("", lat, lon, *(rest or ["moon"]))
    if loc.body not in RADIUS:
        raise DomainError(f"unknown body {loc.body!r}")
    if not abs(loc.lat) < 90:
        raise DomainError(f"Mercator projection is undefined at latitude {loc.lat}")
    r = RADIUS[loc.body]
    phi = math.radians(loc.lat)
    # asinh(tan(phi)) == ln(tan(pi/4 + phi/2)), without the rounding at the equator
    return r * math.radians(loc.lon), r * math.asinh(math.tan(phi))


def distance(l1: Location | tuple, l2: Location | tuple) -> float:
    x1, y1 = project_location(l1)
    x2, y2 = project_location(l2)
    return math.hypot(x2 - x1, y2 - y1)
