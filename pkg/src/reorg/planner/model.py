"""Value types shared by the planner stages."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping

from ..agents import GeneralAgentType
from ..errors import DomainError


@dataclass(frozen=True)
class Bounds:
    psi_m: int = 0
    psi_im: int = 0

    def __post_init__(self):
        for name in ("psi_m", "psi_im"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise DomainError(f"{name} must be a non-negative integer, got {v!r}")


@dataclass(frozen=True)
class Weights:
    """Cost weights; the cost is minimised, so alpha > 0 and beta, epsilon <= 0 is the usual setting."""

    alpha: float = 1.0
    beta: float = -100.0
    epsilon: float = -10.0

    def __post_init__(self):
        if not all(math.isfinite(w) for w in (self.alpha, self.beta, self.epsilon)):
            raise DomainError("weights must be finite")


@dataclass(frozen=True)
class Budget:
    """Search budget.  In deterministic mode both numbers count iterations instead of seconds."""

    epoch_seconds: float = 60.0
    total_seconds: float = 1200.0
    deterministic: bool = False

    def __post_init__(self):
        if self.epoch_seconds < 0 or self.total_seconds < 0:
            raise DomainError("budgets must be >= 0")


@dataclass(frozen=True)
class Visit:
    """An atom stays at ``location`` from ``start`` to ``end`` (timepoint ids).

    ``purpose`` is a requirement id, ``"start"`` for the initial position or
    ``"carry"`` for a stop made only to pick up or drop off cargo.
    """

    location: str
    start: str
    end: str
    purpose: str


@dataclass(frozen=True)
class SolutionCandidate:
    # requirement id -> sorted atom ids bound to it; unassigned requirements are absent
    assignments: Mapping[str, tuple[str, ...]]
    # atom id -> visits ordered in time, beginning with the start visit
    timelines: Mapping[str, tuple[Visit, ...]]
    # total order of timepoints the candidate commits to
    order: tuple[str, ...]
    atom_types: Mapping[str, str]
    # earliest time in seconds of every timepoint once travel times are added
    times: Mapping[str, float] = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    def assigned_type(self, sid: str) -> GeneralAgentType:
        return GeneralAgentType.of(*(self.atom_types[a] for a in self.assignments.get(sid, ())))

    def encoding(self) -> str:
        """Canonical text used for de-duplication and deterministic tie breaks."""
        return json.dumps({
            "a": {k: list(v) for k, v in sorted(self.assignments.items())},
            "t": {k: [[v.location, v.start, v.end, v.purpose] for v in vs] for k, vs in sorted(self.timelines.items())},
        }, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class SolutionScore:
    energy: float  # kWh
    sat: float
    saf: float
    efficacy: int
    cost: float
    reconfig_total: float  # seconds
