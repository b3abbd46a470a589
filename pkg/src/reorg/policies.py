"""Selection policies, the sum composition operator and numeric inference rules.

A policy is a chain of steps written outermost first, the way policies are
usually written down::

    random_sel . prop_sel(argmax, tcap) . size_sel(=, 1) . func_sel(TransportProvider)

and evaluated right to left starting from the powerset of a general agent's
atoms.  Leading ``size_sel``/``func_sel`` steps are pointwise filters, so
subsets are generated only at the admissible sizes; ``size_sel(=, 1)`` turns
into a linear scan.
"""
from __future__ import annotations

import itertools
import math
import operator
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .agents import AtomicAgent, GeneralAgentType, instantiate, type_of
from .capability import has_functionality
from .errors import BudgetExceeded, DomainError, UnknownProperty, ValidationError
from .ontology import ResourceModel, resolve_property

SIZE_OPS = {
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
    "=": operator.eq,
    "==": operator.eq,
}
MAX_SUBSETS = 1 << 20


@dataclass(frozen=True)
class SizeSel:
    op: str
    beta: int


@dataclass(frozen=True)
class FuncSel:
    functionality: str


@dataclass(frozen=True)
class PropSel:
    op: str  # argmax | argmin
    prop: str


@dataclass(frozen=True)
class RandomSel:
    pass


Step = SizeSel | FuncSel | PropSel | RandomSel


@dataclass(frozen=True)
class SelectionPolicy:
    name: str
    chain: tuple[Step, ...]

    def __post_init__(self):
        if not self.chain:
            raise ValidationError(f"policy {self.name!r} has an empty chain")


@dataclass(frozen=True)
class Term:
    sign: int  # +1 or -1
    policy: str
    inverse: bool
    prop: str


@dataclass(frozen=True)
class InferenceRule:
    target: str
    terms: tuple[Term, ...]


TRANSPORT_PROVIDER = SelectionPolicy(
    "TransportProvider",
    (RandomSel(), PropSel("argmax", "tcap"), SizeSel("=", 1), FuncSel("TransportProvider")),
)
BUILTIN_POLICIES = {TRANSPORT_PROVIDER.name: TRANSPORT_PROVIDER}
BUILTIN_RULES = {
    "v_nom": InferenceRule("v_nom", (Term(+1, "TransportProvider", False, "v_nom"),)),
    "tcap": InferenceRule("tcap", (
        Term(+1, "TransportProvider", False, "tcap"),
        Term(-1, "TransportProvider", True, "tcon"),
    )),
}


# ---------------------------------------------------------------------------
# rule document parsing


def parse_step(raw, path="step") -> Step:
    if raw == "random_sel" or (isinstance(raw, Mapping) and "random_sel" in raw):
        return RandomSel()
    if not isinstance(raw, Mapping) or len(raw) != 1:
        raise ValidationError(f"cannot read selection step {raw!r}", path)
    (kind, args), = raw.items()
    if kind == "size_sel":
        op, beta = args
        if op not in SIZE_OPS:
            raise ValidationError(f"unknown size operator {op!r}", path)
        return SizeSel("=" if op == "==" else op, int(beta))
    if kind == "func_sel":
        return FuncSel(str(args))
    if kind == "prop_sel":
        op, prop = args
        if op not in ("argmax", "argmin"):
            raise ValidationError(f"prop_sel operator must be argmax or argmin, got {op!r}", path)
        return PropSel(op, str(prop))
    raise ValidationError(f"unknown selection step {kind!r}", path)


def _cached(model, slot, build):
    # parsed rule tables are stashed on the (frozen) model instance
    value = model.__dict__.get(slot)
    if value is None:
        value = build(model)
        object.__setattr__(model, slot, value)
    return value


def policies(model: ResourceModel) -> dict[str, SelectionPolicy]:
    return _cached(model, "_policies", _parse_policies)


def _parse_policies(model: ResourceModel) -> dict[str, SelectionPolicy]:
    out = dict(BUILTIN_POLICIES)
    for name, steps in (model.rules.get("policies") or {}).items():
        path = f"rules.policies.{name}"
        if not isinstance(steps, list):
            raise ValidationError("policy must be a list of steps", path)
        out[name] = SelectionPolicy(name, tuple(parse_step(s, f"{path}[{i}]") for i, s in enumerate(steps)))
    return out


def _parse_term(raw, path) -> Term:
    if isinstance(raw, Mapping):
        sign, policy, prop = raw.get("sign", "+"), raw.get("policy"), raw.get("property")
    elif isinstance(raw, (list, tuple)) and len(raw) == 3:
        sign, policy, prop = raw
    else:
        raise ValidationError(f"cannot read rule term {raw!r}", path)
    if sign not in ("+", "-"):
        raise ValidationError(f"term sign must be '+' or '-', got {sign!r}", path)
    inverse = False
    policy = str(policy).strip()
    if policy.startswith("not "):
        inverse, policy = True, policy[4:].strip()
    return Term(1 if sign == "+" else -1, policy, inverse, str(prop))


def inference_rules(model: ResourceModel) -> dict[str, InferenceRule]:
    return _cached(model, "_rules", _parse_rules)


def _parse_rules(model: ResourceModel) -> dict[str, InferenceRule]:
    out = dict(BUILTIN_RULES)
    known = policies(model)
    for target, terms in (model.rules.get("properties") or {}).items():
        path = f"rules.properties.{target}"
        if not isinstance(terms, list) or not terms:
            raise ValidationError("rule needs at least one term", path)
        parsed = tuple(_parse_term(t, f"{path}[{i}]") for i, t in enumerate(terms))
        for term in parsed:
            if term.policy not in known:
                raise ValidationError(f"unknown policy {term.policy!r}", path)
        out[target] = InferenceRule(target, parsed)
    return out


def validate_rules(model: ResourceModel) -> None:
    """Parse the model's rule section eagerly so errors surface at load time."""
    inference_rules(model)


# ---------------------------------------------------------------------------
# evaluation


def _atoms(agent: Iterable[AtomicAgent]) -> list[AtomicAgent]:
    return sorted(agent)


def eval_policy(model: ResourceModel, policy: SelectionPolicy | str, agent: Iterable[AtomicAgent],
                seed: int = 0, _stack: tuple = ()) -> frozenset[AtomicAgent]:
    """Atoms of ``agent`` selected by ``policy``; ties broken by ``random_sel`` under ``seed``."""
    if isinstance(policy, str):
        policy = policies(model)[policy]
    atoms = _atoms(agent)
    rng = random.Random(seed)
    steps = list(reversed(policy.chain))  # innermost first

    # fuse leading pointwise filters into subset generation
    size_preds, func_preds = [], []
    while steps and isinstance(steps[0], (SizeSel, FuncSel)):
        step = steps.pop(0)
        (size_preds if isinstance(step, SizeSel) else func_preds).append(step)
    sizes = [k for k in range(len(atoms) + 1) if all(SIZE_OPS[s.op](k, s.beta) for s in size_preds)]
    n_subsets = sum(math.comb(len(atoms), k) for k in sizes)
    if n_subsets > MAX_SUBSETS:
        raise BudgetExceeded(f"policy {policy.name!r} would enumerate {n_subsets} subsets")

    verdict: dict = {}

    def provides(t, f):
        if (t, f) not in verdict:
            verdict[t, f] = has_functionality(model, t, f)
        return verdict[t, f]

    candidates: list[tuple[AtomicAgent, ...]] = []
    for k in sizes:
        for subset in itertools.combinations(atoms, k):
            t = type_of(subset)
            if all(provides(t, f.functionality) for f in func_preds):
                candidates.append(subset)

    for step in steps:
        if isinstance(step, SizeSel):
            candidates = [c for c in candidates if SIZE_OPS[step.op](len(c), step.beta)]
        elif isinstance(step, FuncSel):
            candidates = [c for c in candidates if provides(type_of(c), step.functionality)]
        elif isinstance(step, PropSel):
            if candidates:
                values = [_pvalue(model, c, step.prop, seed, _stack) for c in candidates]
                best = max(values) if step.op == "argmax" else min(values)
                candidates = [c for c, v in zip(candidates, values) if v == best]
        else:
            candidates = [candidates[rng.randrange(len(candidates))]] if candidates else []
    return frozenset(itertools.chain.from_iterable(candidates))


def inverse_policy(model: ResourceModel, policy: SelectionPolicy | str, agent: Iterable[AtomicAgent],
                   seed: int = 0) -> frozenset[AtomicAgent]:
    agent = frozenset(agent)
    return agent - eval_policy(model, policy, agent, seed)


def compose_sum(model: ResourceModel, atoms: Iterable[AtomicAgent], prop: str) -> float:
    return sum((resolve_property(model, a.type, prop) for a in atoms), 0.0)


def _pvalue(model: ResourceModel, atoms: Sequence[AtomicAgent], prop: str, seed: int, stack: tuple) -> float:
    atoms = tuple(sorted(atoms))
    if len(atoms) == 1:
        try:
            return resolve_property(model, atoms[0].type, prop)
        except UnknownProperty:
            pass
    rules = inference_rules(model)
    if prop not in rules:
        return compose_sum(model, atoms, prop)
    key = (atoms, prop)
    if key in stack:
        raise ValidationError(f"inference rule for {prop!r} refers back to itself")
    stack = stack + (key,)
    known = policies(model)
    total = 0.0
    for term in rules[prop].terms:
        chosen = eval_policy(model, known[term.policy], atoms, seed, stack)
        if term.inverse:
            chosen = frozenset(atoms) - chosen
        total += term.sign * compose_sum(model, chosen, term.prop)
    return total


def pvalue_composite(model: ResourceModel, agent_type: Mapping[str, int], prop: str, seed: int = 0) -> float:
    """Numeric property of a general agent type.

    Single atoms use their own (possibly derived) value.  Otherwise the
    inference rule for ``prop`` is applied to the canonical instances of the
    type; properties without a rule fall back to the sum composition.
    """
    atoms = instantiate(GeneralAgentType(agent_type))
    if not atoms:
        return 0.0
    return _pvalue(model, atoms, prop, seed, ())


def ocost(model: ResourceModel, agent_type: Mapping[str, int], t: float) -> float:
    """Energy in joules consumed by ``agent_type`` over ``t`` seconds at nominal power."""
    if t < 0:
        raise DomainError(f"operation time must be >= 0, got {t}")
    return sum(gamma * resolve_property(model, name, "pw") * t for name, gamma in agent_type.items())
