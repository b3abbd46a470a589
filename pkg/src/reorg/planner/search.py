"""Seeded restart search over generated candidates."""
from __future__ import annotations

import logging
import random
import time
from dataclasses import dataclass

from ..errors import NoCandidate, NoSolution
from ..mission import Mission
from .flow import check_flow
from .generate import generate_candidate
from .model import Bounds, Budget, SolutionCandidate, SolutionScore, Weights
from .scoring import from_metrics, metrics

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScoredCandidate:
    id: str
    candidate: SolutionCandidate
    score: SolutionScore
    seed: int


@dataclass(frozen=True)
class SolutionSet:
    candidates: tuple[ScoredCandidate, ...]
    best: ScoredCandidate
    e_max: float
    bounds: Bounds
    weights: Weights
    iterations: int


def candidate_seed(seed: int, epoch: int, iteration: int) -> int:
    """Independent seed for one generation step; string seeding is stable across runs."""
    return random.Random(f"{seed}/{epoch}/{iteration}").getrandbits(63)


def _steps(budget: Budget):
    """Yield (epoch, iteration) pairs until the budget is spent."""
    if budget.deterministic:
        total = int(budget.total_seconds)
        per_epoch = int(budget.epoch_seconds) or total
        for n in range(total):
            yield divmod(n, per_epoch)
        return
    start = time.monotonic()
    epoch, epoch_start, it = 0, start, 0
    while time.monotonic() - start < budget.total_seconds:
        if time.monotonic() - epoch_start >= budget.epoch_seconds > 0:
            epoch, epoch_start, it = epoch + 1, time.monotonic(), 0
        yield epoch, it
        it += 1


def plan(mission: Mission, bounds: Bounds = Bounds(), weights: Weights = Weights(), budget: Budget = Budget(),
         seed: int = 0) -> SolutionSet:
    """Generate, check and score candidates in seeded epochs.

    Every distinct candidate is kept, partial ones included.  Energies are
    normalised by the largest energy among the kept candidates.
    """
    raw = []
    seen = set()
    iterations = 0
    for epoch, it in _steps(budget):
        iterations += 1
        cseed = candidate_seed(seed, epoch, it)
        try:
            cand = generate_candidate(mission, bounds, cseed)
        except NoCandidate as exc:
            log.debug("epoch %d iteration %d: %s", epoch, it, exc)
            continue
        key = cand.encoding()
        if key in seen:
            continue
        seen.add(key)
        flow = check_flow(mission, cand)
        raw.append((cand, metrics(mission, cand, flow), cseed, key))
        log.debug("epoch %d iteration %d: candidate %d", epoch, it, len(raw))
    if not raw:
        raise NoSolution(f"no candidate found in {iterations} iterations")
    e_max = max(m.energy for _, m, _, _ in raw)
    if e_max <= 0:
        e_max = 1.0
    scored = tuple(ScoredCandidate(f"c{i:04d}", c, from_metrics(m, weights, e_max), s)
                   for i, (c, m, s, _) in enumerate(raw))
    keys = {sc.id: k for sc, (_, _, _, k) in zip(scored, raw)}
    best = min(scored, key=lambda sc: (sc.score.cost, keys[sc.id]))
    log.info("%d candidates from %d iterations; best %s cost %.4f", len(scored), iterations, best.id,
             best.score.cost)
    return SolutionSet(scored, best, e_max, bounds, weights, iterations)
