"""
Hardware/software partitioning: mapping evaluation and search.
"""

from .evaluate import (
    Constraints,
    EvaluationResult,
    PartitionObjective,
    RefinementDelta,
    Scenario,
    evaluate_mapping,
    refinement_delta,
)
from .search import SearchReport, optimize

__all__ = [
    "Constraints", "EvaluationResult", "PartitionObjective", "RefinementDelta", "Scenario",
    "evaluate_mapping", "refinement_delta", "SearchReport", "optimize",
]
