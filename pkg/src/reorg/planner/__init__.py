"""Mission planning: candidate generation, transport flow, scoring and search."""
from .flow import FeasibilityReport, check_flow
from .generate import generate_candidate
from .model import Bounds, Budget, SolutionCandidate, SolutionScore, Visit, Weights
from .scoring import constellations, metrics, reconfiguration, satisfied, score, structures
from .search import ScoredCandidate, SolutionSet, plan

__all__ = [
    "Bounds", "Budget", "FeasibilityReport", "ScoredCandidate", "SolutionCandidate", "SolutionScore",
    "SolutionSet", "Visit", "Weights", "check_flow", "constellations", "generate_candidate", "metrics",
    "plan", "reconfiguration", "satisfied", "score", "structures",
]
