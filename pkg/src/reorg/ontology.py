"""Resource taxonomy, functionality requirements and agent type definitions.

A :class:`ResourceModel` is built once from a model document and is read-only
afterwards.  All derived tables (flattened functionality requirements, merged
agent type definitions after inheritance) are computed at load time so that
queries never mutate the model.
"""
from __future__ import annotations

import ast
import operator
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Any, Mapping

import yaml

from .errors import (
    DivisionByZero,
    ParseError,
    UnknownConcept,
    UnknownFunctionality,
    UnresolvableProperty,
    ValidationError,
)

KINDS = ("resource", "functionality", "interface", "agent-type")
GENDERS = ("male", "female")

# properties that must be non-negative when set directly
NON_NEGATIVE = ("v_nom", "tcap", "tcon", "tload", "esourcecap", "esupply", "pw")


@dataclass(frozen=True)
class ResourceConcept:
    id: str
    parent: str | None
    kind: str
    p_survival: float | None = None


@dataclass(frozen=True)
class FunctionalityRequirement:
    functionality: str
    requirements: Mapping[str, int]


@dataclass(frozen=True)
class DataProperty:
    name: str
    value: float
    owner: str


@dataclass(frozen=True)
class DerivedPropertyFormula:
    target: str
    expression: str

    def names(self) -> set[str]:
        return {n.id for n in ast.walk(ast.parse(self.expression, mode="eval")) if isinstance(n, ast.Name)}


@dataclass(frozen=True)
class Interface:
    type: str
    gender: str
    count: int


@dataclass(frozen=True)
class AgentTypeDefinition:
    id: str
    resources: Mapping[str, int]
    interfaces: tuple[Interface, ...]
    properties: Mapping[str, float]
    parent: str | None = None


@dataclass(frozen=True)
class ResourceModel:
    concepts: Mapping[str, ResourceConcept]
    functionalities: Mapping[str, FunctionalityRequirement]
    agent_types: Mapping[str, AgentTypeDefinition]
    formulas: Mapping[str, DerivedPropertyFormula]
    # raw ``rules`` section, interpreted by reorg.policies
    rules: Mapping[str, Any] = field(default_factory=dict)
    # functionality -> flattened resource minima (MAX-merged)
    flat_requirements: Mapping[str, Mapping[str, int]] = field(default_factory=dict)

    def concept(self, name: str) -> ResourceConcept:
        try:
            return self.concepts[name]
        except KeyError:
            raise UnknownConcept(name) from None

    def agent_type(self, name: str) -> AgentTypeDefinition:
        try:
            return self.agent_types[name]
        except KeyError:
            raise UnknownConcept(f"unknown agent type {name!r}") from None

    def functionality(self, name: str) -> FunctionalityRequirement:
        try:
            return self.functionalities[name]
        except KeyError:
            raise UnknownFunctionality(f"unknown functionality {name!r}") from None

    def ancestors(self, name: str) -> list[str]:
        """Parent chain of ``name``, nearest first, excluding ``name``."""
        chain = []
        parent = self.concept(name).parent
        while parent is not None:
            chain.append(parent)
            parent = self.concepts[parent].parent
        return chain


# ---------------------------------------------------------------------------
# loading


def load_model_file(path: str | Path) -> ResourceModel:
    return load_model(Path(path).read_text())


def load_model(document: str | Mapping[str, Any]) -> ResourceModel:
    """Parse and validate a model document (YAML text or an already-parsed mapping)."""
    if isinstance(document, str):
        try:
            document = yaml.safe_load(document)
        except yaml.YAMLError as exc:
            raise ParseError(f"malformed model document: {exc}") from exc
    if document is None:
        document = {}
    if not isinstance(document, Mapping):
        raise ParseError("model document must be a mapping at top level")
    unknown = set(document) - {"concepts", "functionalities", "agent_types", "formulas", "rules"}
    if unknown:
        raise ValidationError(f"unknown top-level sections {sorted(unknown)}")

    concepts = _load_concepts(document)
    functionalities = _load_functionalities(document.get("functionalities") or {}, concepts)
    agent_types = _load_agent_types(document.get("agent_types") or {}, concepts)
    formulas = _load_formulas(document.get("formulas") or {}, agent_types)
    rules = document.get("rules") or {}
    if not isinstance(rules, Mapping):
        raise ValidationError("must be a mapping", "rules")

    flat = _flatten_requirements(functionalities, concepts)
    model = ResourceModel(
        concepts=MappingProxyType(concepts),
        functionalities=MappingProxyType(functionalities),
        agent_types=MappingProxyType(agent_types),
        formulas=MappingProxyType(formulas),
        rules=MappingProxyType(dict(rules)),
        flat_requirements=MappingProxyType({k: MappingProxyType(v) for k, v in flat.items()}),
    )
    from .policies import validate_rules  # policies builds on this module

    validate_rules(model)
    return model


def _mapping(value, path) -> Mapping:
    if value is None:
        return {}
    if not isinstance(value, Mapping):
        raise ValidationError("expected a mapping", path)
    return value


def _count(value, path) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ValidationError(f"cardinality must be a non-negative integer, got {value!r}", path)
    return value


def _number(value, path) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"expected a number, got {value!r}", path)
    return float(value)


def _probability(value, path) -> float:
    p = _number(value, path)
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"probability must lie in [0, 1], got {p}", path)
    return p


def _load_concepts(document: Mapping) -> dict[str, ResourceConcept]:
    raw: dict[str, dict] = {}
    for name, spec in _mapping(document.get("concepts"), "concepts").items():
        raw[str(name)] = dict(_mapping(spec, f"concepts.{name}"))
    # functionalities and agent types are concepts too
    for section, kind in (("functionalities", "functionality"), ("agent_types", "agent-type")):
        for name, spec in _mapping(document.get(section), section).items():
            name = str(name)
            if name in raw:
                raise ValidationError("concept id defined twice", f"{section}.{name}")
            spec = _mapping(spec, f"{section}.{name}")
            # agent type parents are agent types, handled by inheritance
            parent = spec.get("parent") if section == "functionalities" else None
            raw[name] = {"kind": kind, "parent": parent}

    for name, spec in raw.items():
        parent = spec.get("parent")
        if parent is not None and parent not in raw:
            raise ValidationError(f"unknown parent concept {parent!r}", f"concepts.{name}.parent")

    # single inheritance forest: detect cycles along parent chains
    for name in raw:
        seen = {name}
        parent = raw[name].get("parent")
        while parent is not None:
            if parent in seen:
                raise ValidationError(f"cycle in concept hierarchy through {parent!r}", f"concepts.{name}")
            seen.add(parent)
            parent = raw[parent].get("parent")

    def kind_of(name: str) -> str:
        spec = raw[name]
        if spec.get("kind") is not None:
            return spec["kind"]
        if spec.get("parent") is not None:
            return kind_of(spec["parent"])
        return "resource"

    concepts = {}
    for name, spec in raw.items():
        kind = kind_of(name)
        if kind not in KINDS:
            raise ValidationError(f"unknown kind {kind!r}", f"concepts.{name}.kind")
        extra = set(spec) - {"kind", "parent", "p_survival"}
        if extra:
            raise ValidationError(f"unknown keys {sorted(extra)}", f"concepts.{name}")
        p = spec.get("p_survival")
        if p is not None:
            p = _probability(p, f"concepts.{name}.p_survival")
        concepts[name] = ResourceConcept(name, spec.get("parent"), kind, p)
    return concepts


def _load_functionalities(section: Mapping, concepts) -> dict[str, FunctionalityRequirement]:
    out = {}
    for name, spec in section.items():
        name = str(name)
        spec = _mapping(spec, f"functionalities.{name}")
        extra = set(spec) - {"requires", "parent"}
        if extra:
            raise ValidationError(f"unknown keys {sorted(extra)}", f"functionalities.{name}")
        reqs = {}
        for concept, count in _mapping(spec.get("requires"), f"functionalities.{name}.requires").items():
            path = f"functionalities.{name}.requires.{concept}"
            if concept not in concepts:
                raise ValidationError(f"unknown concept {concept!r}", path)
            if concepts[concept].kind == "agent-type":
                raise ValidationError("functionalities cannot require agent types", path)
            reqs[str(concept)] = _count(count, path)
        out[name] = FunctionalityRequirement(name, MappingProxyType(reqs))
    return out


def _flatten_requirements(functionalities, concepts) -> dict[str, dict[str, int]]:
    flat: dict[str, dict[str, int]] = {}
    visiting: list[str] = []

    def visit(f: str) -> dict[str, int]:
        if f in flat:
            return flat[f]
        if f in visiting:
            cycle = visiting[visiting.index(f):] + [f]
            raise ValidationError("cycle in functionality dependencies: " + " -> ".join(cycle),
                                  f"functionalities.{f}")
        visiting.append(f)
        merged: dict[str, int] = {}
        for concept, count in functionalities[f].requirements.items():
            if count == 0:
                continue
            if concepts[concept].kind == "functionality":
                if concept not in functionalities:
                    raise ValidationError(f"functionality {concept!r} has no requirement entry",
                                          f"functionalities.{f}.requires")
                sub = {c: n * count for c, n in visit(concept).items()}
            else:
                sub = {concept: count}
            for c, n in sub.items():
                merged[c] = max(merged.get(c, 0), n)
        visiting.pop()
        flat[f] = merged
        return merged

    for f in functionalities:
        visit(f)
    return flat


def _load_agent_types(section: Mapping, concepts) -> dict[str, AgentTypeDefinition]:
    if not section:
        raise ValidationError("model defines no agent types", "agent_types")
    raw = {}
    for name, spec in section.items():
        name = str(name)
        spec = _mapping(spec, f"agent_types.{name}")
        extra = set(spec) - {"parent", "resources", "interfaces", "properties"}
        if extra:
            raise ValidationError(f"unknown keys {sorted(extra)}", f"agent_types.{name}")
        resources = {}
        for concept, count in _mapping(spec.get("resources"), f"agent_types.{name}.resources").items():
            path = f"agent_types.{name}.resources.{concept}"
            if concept not in concepts:
                raise ValidationError(f"unknown concept {concept!r}", path)
            if concepts[concept].kind not in ("resource", "interface"):
                raise ValidationError(f"{concept!r} is not a resource concept", path)
            resources[str(concept)] = _count(count, path)
        interfaces = []
        items = spec.get("interfaces") or []
        if not isinstance(items, list):
            raise ValidationError("expected a list", f"agent_types.{name}.interfaces")
        for i, item in enumerate(items):
            path = f"agent_types.{name}.interfaces[{i}]"
            item = _mapping(item, path)
            itype = item.get("type")
            if itype not in concepts or concepts[itype].kind != "interface":
                raise ValidationError(f"unknown interface concept {itype!r}", path)
            gender = item.get("gender")
            if gender not in GENDERS:
                raise ValidationError(f"gender must be male or female, got {gender!r}", path)
            interfaces.append(Interface(itype, gender, _count(item.get("count", 1), path + ".count")))
        props = {}
        for prop, value in _mapping(spec.get("properties"), f"agent_types.{name}.properties").items():
            path = f"agent_types.{name}.properties.{prop}"
            value = _number(value, path)
            if prop in NON_NEGATIVE and value < 0:
                raise ValidationError(f"{prop} must be >= 0", path)
            if prop == "probabilityOfSurvival":
                _probability(value, path)
            props[str(prop)] = value
        parent = spec.get("parent")
        if parent is not None and parent not in section:
            raise ValidationError(f"unknown parent agent type {parent!r}", f"agent_types.{name}.parent")
        raw[name] = (parent, resources, interfaces, props)

    merged: dict[str, AgentTypeDefinition] = {}

    def build(name: str, stack=()) -> AgentTypeDefinition:
        if name in merged:
            return merged[name]
        if name in stack:
            raise ValidationError("cycle in agent type inheritance", f"agent_types.{name}.parent")
        parent, resources, interfaces, props = raw[name]
        if parent is not None:
            base = build(parent, stack + (name,))
            # child overrides parent
            resources = {**base.resources, **resources}
            props = {**base.properties, **props}
            if not interfaces:
                interfaces = list(base.interfaces)
        merged[name] = AgentTypeDefinition(
            name, MappingProxyType(resources), tuple(interfaces), MappingProxyType(props), parent
        )
        return merged[name]

    for name in raw:
        build(name)
    return merged


def _load_formulas(section: Mapping, agent_types) -> dict[str, DerivedPropertyFormula]:
    formulas = {}
    for target, expr in section.items():
        path = f"formulas.{target}"
        if not isinstance(expr, str):
            raise ValidationError("formula must be an expression string", path)
        try:
            tree = ast.parse(expr, mode="eval")
        except SyntaxError as exc:
            raise ValidationError(f"cannot parse expression: {exc.msg}", path) from None
        for node in ast.walk(tree):
            if not isinstance(node, _ALLOWED_NODES):
                raise ValidationError(f"unsupported syntax {type(node).__name__}", path)
        formulas[str(target)] = DerivedPropertyFormula(str(target), expr)

    known = set(formulas)
    for t in agent_types.values():
        known.update(t.properties)
    for target, formula in formulas.items():
        missing = formula.names() - known
        if missing:
            raise ValidationError(f"references undefined properties {sorted(missing)}", f"formulas.{target}")

    # no cyclic derivations
    state: dict[str, int] = {}

    def visit(name: str, chain: list[str]):
        if state.get(name) == 2 or name not in formulas:
            return
        if state.get(name) == 1:
            raise ValidationError("cyclic derivation " + " -> ".join(chain + [name]), f"formulas.{name}")
        state[name] = 1
        for dep in formulas[name].names():
            visit(dep, chain + [name])
        state[name] = 2

    for name in formulas:
        visit(name, [])
    return formulas


# ---------------------------------------------------------------------------
# queries


def is_instance_of(model: ResourceModel, concept: str, ancestor: str) -> bool:
    model.concept(ancestor)
    return concept == ancestor or ancestor in model.ancestors(concept)


def card_min(model: ResourceModel, c: str, f: str) -> int:
    """Minimum number of ``c`` instances the functionality ``f`` needs."""
    model.concept(c)
    model.functionality(f)
    return model.flat_requirements[f].get(c, 0)


def card_max(model: ResourceModel, c: str, agent_type: Mapping[str, int]) -> int:
    """Number of resource instances in ``agent_type`` that are instances of ``c``."""
    model.concept(c)
    total = 0
    for atomic, gamma in agent_type.items():
        definition = model.agent_type(atomic)
        if gamma == 0:
            continue
        per_atom = sum(n for r, n in definition.resources.items() if is_instance_of(model, r, c))
        total += gamma * per_atom
    return total


def instance_survival(model: ResourceModel, concept: str) -> float:
    """Probability of survival of one instance of ``concept``.

    Falls back to the nearest ancestor declaring one, then to 1.0.
    """
    for name in [concept] + model.ancestors(concept):
        p = model.concepts[name].p_survival
        if p is not None:
            return p
    return 1.0


_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_ALLOWED_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name, ast.Load,
                  *_BINOPS, *_UNARY)


def evaluate_expression(expression: str, lookup) -> float:
    """Evaluate an arithmetic expression; ``lookup(name)`` resolves identifiers."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            return lookup(node.id)
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            left, right = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Div) and right == 0:
                raise DivisionByZero(f"division by zero in {expression!r}")
            return _BINOPS[type(node.op)](left, right)
        raise ValidationError(f"unsupported expression element {ast.dump(node)}")

    return ev(ast.parse(expression, mode="eval"))


def resolve_property(model: ResourceModel, agent_type: str, name: str) -> float:
    """Value of property ``name`` for an atomic agent type, evaluating formulas as needed."""
    definition = model.agent_type(agent_type)

    def lookup(prop: str, stack=()) -> float:
        if prop in definition.properties:
            return definition.properties[prop]
        formula = model.formulas.get(prop)
        if formula is None or prop in stack:
            raise UnresolvableProperty(f"property {prop!r} is not defined for {agent_type!r}")
        return evaluate_expression(formula.expression, lambda n: lookup(n, stack + (prop,)))

    return lookup(name)
