"""
Mapping search: exhaustive enumeration and greedy single-flip descent.

Only dual-kind components are free; single-kind components keep their one
allowed kind. Among feasible mappings the winner minimizes
(objective, number of HW assignments, mapping order with SW < HW).
"""

import heapq
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any, Dict, Iterator, List, Optional, Tuple

from constants.kinds import EVALUATION_CHUNK, EXHAUSTIVE_FREE_LIMIT, REPORT_ENTRY_LIMIT, Kind
from core.engine import Mapping
from core.errors import NoFeasibleMapping, TooManyFreeComponents
from core.graph import SystemModel
from partition.evaluate import Constraints, EvaluationResult, PartitionObjective, Scenario, evaluate_mapping
from utils.decimals import format_fixed
from utils.logging import log_success


logger = logging.getLogger(__name__)

METHODS = ("exhaustive", "greedy")


@dataclass(frozen=True)
class Flip:
    component: str
    kind: Kind
    objective: Any   # Fraction after the flip


@dataclass
class SearchReport:
    """
    Outcome of one search.

    `evaluated` counts every evaluation; `entries` keeps only the
    REPORT_ENTRY_LIMIT best of them (feasible first, then selection order).
    """
    method: str
    evaluated: int = 0
    entries: List[EvaluationResult] = field(default_factory=list)
    flips: List[Flip] = field(default_factory=list)

    def record(self, results: List[EvaluationResult]):
        self.evaluated += len(results)
        self.entries = heapq.nsmallest(REPORT_ENTRY_LIMIT, self.entries + results, key=report_key)

    def to_tree(self) -> Dict[str, Any]:
        tree = {
            "method": self.method,
            "evaluated": self.evaluated,
            "entries": [entry.to_tree() for entry in self.entries],
        }
        if self.method == "greedy":
            tree["flips"] = [
                {"component": f.component, "kind": f.kind.value, "objective": Decimal(format_fixed(f.objective))}
                for f in self.flips
            ]
        return tree


def selection_key(result: EvaluationResult) -> Tuple:
    """Deterministic argmin key: objective, then fewer HW, then SW < HW order."""
    return result.objective_value, result.mapping.hardware_count(), result.mapping.order_key()


def report_key(result: EvaluationResult) -> Tuple:
    return not result.feasible, selection_key(result)


def fixed_kinds(model: SystemModel) -> Dict[str, Kind]:
    return {
        cid: next(iter(spec.allowed_kinds))
        for cid, spec in model.components.items() if not spec.is_dual_kind
    }


@contextmanager
def _evaluator(model, scenario, objective, constraints, workers: int):
    """Yield a function evaluating a batch of mappings, in order, on one shared pool."""
    def evaluate(mapping):
        return evaluate_mapping(model, scenario, mapping, objective, constraints)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            yield lambda mappings: list(pool.map(evaluate, mappings))
    else:
        yield lambda mappings: [evaluate(m) for m in mappings]


def exhaustive_mappings(model: SystemModel) -> Iterator[Mapping]:
    """Lazily yield every mapping over the free components, in lexicographic order."""
    free = model.dual_kind_components()
    if len(free) > EXHAUSTIVE_FREE_LIMIT:
        raise TooManyFreeComponents(
            f"{len(free)} dual-kind components exceed the exhaustive limit of {EXHAUSTIVE_FREE_LIMIT}")
    fixed = fixed_kinds(model)
    return (
        Mapping.of({**fixed, **dict(zip(free, choice))})
        for choice in itertools.product((Kind.SOFTWARE, Kind.HARDWARE), repeat=len(free))
    )


def _exhaustive(model, scenario, objective, constraints, workers) -> Tuple[EvaluationResult, SearchReport]:
    mappings = exhaustive_mappings(model)
    logger.info("exhaustive search over %d mapping(s)", 2 ** len(model.dual_kind_components()))
    report = SearchReport("exhaustive")
    best: Optional[EvaluationResult] = None
    with _evaluator(model, scenario, objective, constraints, workers) as evaluate:
        while True:
            chunk = list(itertools.islice(mappings, EVALUATION_CHUNK))
            if not chunk:
                break
            results = evaluate(chunk)
            report.record(results)
            feasible = [r for r in results if r.feasible]
            if best is not None:
                feasible.append(best)
            best = min(feasible, key=selection_key, default=None)
    if best is None:
        raise NoFeasibleMapping(f"none of {report.evaluated} mapping(s) meets the constraints")
    return best, report


def _flip(kind: Kind) -> Kind:
    return Kind.HARDWARE if kind == Kind.SOFTWARE else Kind.SOFTWARE


def _greedy(model, scenario, objective, constraints, workers) -> Tuple[EvaluationResult, SearchReport]:
    free = model.dual_kind_components()
    report = SearchReport("greedy")

    with _evaluator(model, scenario, objective, constraints, workers) as evaluate:
        (current,) = evaluate([Mapping.all_software(model)])
        report.record([current])
        if not current.feasible:
            raise NoFeasibleMapping("the all-software start is infeasible; greedy search needs a feasible start")

        while True:
            candidates = [(cid, current.mapping.with_kind(cid, _flip(current.mapping[cid]))) for cid in free]
            results = evaluate([m for _, m in candidates])
            report.record(results)
            options = [
                (cid, r) for (cid, _), r in zip(candidates, results)
                if r.feasible and r.objective_value < current.objective_value
            ]
            if not options:
                break
            cid, current = min(options, key=lambda o: (o[1].objective_value, o[1].mapping.hardware_count(), o[0]))
            report.flips.append(Flip(cid, current.mapping[cid], current.objective_value))
            logger.info("greedy flip %s -> %s, objective %s", cid, current.mapping[cid].value,
                        format_fixed(current.objective_value))
    return current, report


def optimize(
    model: SystemModel,
    scenario: Scenario,
    objective: PartitionObjective,
    constraints: Constraints,
    method: str = "exhaustive",
    workers: int = 1,
) -> Tuple[EvaluationResult, SearchReport]:
    """
    Find the best feasible mapping.

    Args:
        model: Validated system model
        scenario: Evaluation workload
        objective: Weights and reference values
        constraints: Area budget and security floor
        method: "exhaustive" or "greedy"
        workers: Thread pool size for evaluations (1 = serial)

    Returns:
        (best EvaluationResult, SearchReport)

    Raises:
        NoFeasibleMapping: If no mapping is feasible (greedy: if the all-software start is not)
        TooManyFreeComponents: Exhaustive search over more than 24 free components
    """
    if method not in METHODS:
        raise ValueError(f"unknown search method {method!r} (expected exhaustive or greedy)")
    search = _exhaustive if method == "exhaustive" else _greedy
    best, report = search(model, scenario, objective, constraints, workers)
    log_success(logger, "%s search: %s (objective %s, %d evaluated)", method,
                best.mapping.describe(), format_fixed(best.objective_value), report.evaluated)
    return best, report
