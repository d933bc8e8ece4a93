"""
Mapping evaluation for hardware/software partitioning.

A mapping is scored by actually running the model under it (makespan),
summing hardware area, summing per-firing energy of the assigned kinds and
taking the weakest assigned security level. The scalar objective is

    w_time * time/ref_time + w_area * area/ref_area
      + w_energy * energy/ref_energy - w_security * security/ref_security

computed exactly with Fractions, so argmin ties are real ties.
"""

import logging
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Any, Callable, Dict, Optional, Tuple, Union

from constants.kinds import (
    DEFAULT_SEED, DEFAULT_STEP_LIMIT, EventKind, MICRO_UNITS, SECURITY_MAX, SECURITY_MIN,
)
from core.engine import Engine, Mapping, SimConfig
from core.errors import InvalidMapping, KindNotAllowed
from core.graph import SystemModel
from core.model import BehaviorRegistry, Endpoint, Message
from utils.decimals import format_fixed, from_micro


logger = logging.getLogger(__name__)

Number = Union[int, Decimal, Fraction, str]


def _exact(value: Number) -> Fraction:
    return Fraction(Decimal(value)) if isinstance(value, str) else Fraction(value)


def parse_quad(text: str) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
    """Parse 't,a,e,s' into four exact numbers."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ValueError(f"expected four comma-separated numbers, got {text!r}")
    try:
        return tuple(Fraction(Decimal(p)) for p in parts)
    except ArithmeticError:
        raise ValueError(f"not a number list: {text!r}") from None


@dataclass(frozen=True)
class PartitionObjective:
    w_time: Fraction = Fraction(1)
    w_area: Fraction = Fraction(1)
    w_energy: Fraction = Fraction(1)
    w_security: Fraction = Fraction(1)
    ref_time: Fraction = Fraction(1)
    ref_area: Fraction = Fraction(1)
    ref_energy: Fraction = Fraction(1)
    ref_security: Fraction = Fraction(1)

    def __post_init__(self):
        for name in ("w_time", "w_area", "w_energy", "w_security",
                     "ref_time", "ref_area", "ref_energy", "ref_security"):
            object.__setattr__(self, name, _exact(getattr(self, name)))
        weights = self.weights()
        if any(w < 0 for w in weights) or not any(w > 0 for w in weights):
            raise ValueError("weights must be >= 0 with at least one > 0")
        if any(r <= 0 for r in self.refs()):
            raise ValueError("reference values must be > 0")

    @classmethod
    def parse(cls, weights: str = "1,1,1,1", refs: str = "1,1,1,1") -> "PartitionObjective":
        return cls(*parse_quad(weights), *parse_quad(refs))

    def weights(self) -> Tuple[Fraction, ...]:
        return self.w_time, self.w_area, self.w_energy, self.w_security

    def refs(self) -> Tuple[Fraction, ...]:
        return self.ref_time, self.ref_area, self.ref_energy, self.ref_security

    def score(self, time_micro: int, area: Decimal, energy: Decimal, security: int) -> Fraction:
        return (self.w_time * Fraction(time_micro, MICRO_UNITS) / self.ref_time
                + self.w_area * Fraction(area) / self.ref_area
                + self.w_energy * Fraction(energy) / self.ref_energy
                - self.w_security * Fraction(security) / self.ref_security)

    def scaled_refs(self, factor: Number) -> "PartitionObjective":
        factor = _exact(factor)
        return PartitionObjective(*self.weights(), *(r * factor for r in self.refs()))


@dataclass(frozen=True)
class Constraints:
    """area_budget None means unbounded."""
    area_budget: Optional[Decimal] = None
    security_floor: int = SECURITY_MIN

    def __post_init__(self):
        if self.area_budget is not None:
            object.__setattr__(self, "area_budget", Decimal(self.area_budget))
            if self.area_budget < 0:
                raise ValueError("area_budget must be >= 0")
        if not SECURITY_MIN <= self.security_floor <= SECURITY_MAX:
            raise ValueError(f"security_floor must lie in [{SECURITY_MIN}, {SECURITY_MAX}]")

    def admits(self, area: Decimal, security: int) -> bool:
        within_budget = self.area_budget is None or area <= self.area_budget
        return within_budget and security >= self.security_floor


@dataclass
class Scenario:
    """
    The evaluation workload: what the engine is run on for every mapping.

    Attributes:
        initial_inputs: Messages placed at t=0
        seed: Engine seed
        step_limit: Engine step limit
        states: Factory returning fresh initial behavior states per run
        registry: Behavior registry (default builtins)
    """
    initial_inputs: Dict[Endpoint, Message] = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    step_limit: int = DEFAULT_STEP_LIMIT
    states: Optional[Callable[[], Dict[str, Any]]] = None
    registry: Optional[BehaviorRegistry] = None


@dataclass(frozen=True)
class EvaluationResult:
    mapping: Mapping
    total_time: int            # micro-units
    total_area: Decimal
    total_energy: Decimal
    min_security: int
    objective_value: Fraction
    feasible: bool

    def to_tree(self) -> Dict[str, Any]:
        return {
            "mapping": {cid: kind.value for cid, kind in self.mapping.assignment},
            "time": from_micro(self.total_time),
            "area": self.total_area,
            "energy": self.total_energy,
            "security": self.min_security,
            "objective": Decimal(format_fixed(self.objective_value)),
            "feasible": self.feasible,
        }


@dataclass(frozen=True)
class RefinementDelta:
    time: int                  # micro-units
    area: Decimal
    energy: Decimal
    security: int
    objective: Fraction
    feasible_a: bool
    feasible_b: bool


def evaluate_mapping(
    model: SystemModel,
    scenario: Scenario,
    mapping: Mapping,
    objective: PartitionObjective,
    constraints: Constraints,
) -> EvaluationResult:
    """
    Score one mapping.

    Args:
        model: Validated system model
        scenario: Evaluation workload
        mapping: SW/HW assignment to score
        objective: Weights and reference values
        constraints: Area budget and security floor

    Returns:
        The EvaluationResult

    Raises:
        InvalidMapping: If the mapping does not fit the model
        EngineError: Forwarded from the engine run
    """
    try:
        mapping.check(model)
    except KindNotAllowed as e:
        raise InvalidMapping(e.message) from None

    config = SimConfig(seed=scenario.seed, step_limit=scenario.step_limit, mapping=mapping)
    states = scenario.states() if scenario.states else None
    trace = Engine(model, config, scenario.initial_inputs, states, scenario.registry).run()

    kinds = mapping.as_dict()
    area = sum((spec.costs.area(kinds[cid]) for cid, spec in model.components.items()), Decimal(0))
    energy = Decimal(0)
    for event in trace.of_kind(EventKind.COMPONENT_START):
        energy += model.components[event.subject].costs.energy(kinds[event.subject])
    security = min(spec.costs.security(kinds[cid]) for cid, spec in model.components.items())

    result = EvaluationResult(
        mapping=mapping,
        total_time=trace.sim_time,
        total_area=area,
        total_energy=energy,
        min_security=security,
        objective_value=objective.score(trace.sim_time, area, energy, security),
        feasible=constraints.admits(area, security),
    )
    logger.debug("evaluated %s -> objective %s%s", mapping.describe(),
                 format_fixed(result.objective_value), "" if result.feasible else " (infeasible)")
    return result


def refinement_delta(
    model: SystemModel,
    scenario: Scenario,
    mapping_a: Mapping,
    mapping_b: Mapping,
    objective: PartitionObjective,
    constraints: Constraints,
) -> RefinementDelta:
    """Metrics of mapping_b minus metrics of mapping_a, plus each one's feasibility."""
    a = evaluate_mapping(model, scenario, mapping_a, objective, constraints)
    b = evaluate_mapping(model, scenario, mapping_b, objective, constraints)
    return RefinementDelta(
        time=b.total_time - a.total_time,
        area=b.total_area - a.total_area,
        energy=b.total_energy - a.total_energy,
        security=b.min_security - a.min_security,
        objective=b.objective_value - a.objective_value,
        feasible_a=a.feasible,
        feasible_b=b.feasible,
    )
