"""
Component model for mixed software/hardware systems.

A component declares typed input/output ports, a cost annotation per
implementation kind, and the name of the behavior that executes it. The
behavior itself lives in a BehaviorRegistry and is resolved by name.

Behaviors are plain callables `fn(call: BehaviorCall) -> BehaviorResult`.
They get the consumed input messages, their own local state and a
per-firing seed, and return the messages they emit plus their new state.
"""

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple

import numpy as np

from constants.kinds import Kind, Direction, SECURITY_MIN, SECURITY_MAX
from core.errors import (
    BehaviorNotFound, DuplicateBehavior, MissingInput, TagDiscipline,
    ValidationFailed, Violation,
)
from utils.decimals import fraction_digits, to_micro


DataTag = str
Endpoint = Tuple[str, str]   # (component id, port name)


# =============================================================================
# Component Specification
# =============================================================================

@dataclass(frozen=True)
class PortSpec:
    name: str
    direction: Direction
    tag: DataTag


COST_DECIMAL_FIELDS = ("sw_time", "hw_time", "hw_area", "sw_energy", "hw_energy")
COST_SECURITY_FIELDS = ("sw_security", "hw_security")


@dataclass(frozen=True)
class CostAnnotation:
    """
    Per-kind costs of one component.

    Times, area and energies are exact decimals in units; security levels
    are ordinals in [0, 5] where higher is better.
    """
    sw_time: Decimal = Decimal(0)
    hw_time: Decimal = Decimal(0)
    hw_area: Decimal = Decimal(0)
    sw_energy: Decimal = Decimal(0)
    hw_energy: Decimal = Decimal(0)
    sw_security: int = 0
    hw_security: int = 0

    def time(self, kind: Kind) -> Decimal:
        return self.sw_time if kind == Kind.SOFTWARE else self.hw_time

    def time_micro(self, kind: Kind) -> int:
        return to_micro(self.time(kind))

    def area(self, kind: Kind) -> Decimal:
        # Software occupies no silicon
        return self.hw_area if kind == Kind.HARDWARE else Decimal(0)

    def energy(self, kind: Kind) -> Decimal:
        return self.sw_energy if kind == Kind.SOFTWARE else self.hw_energy

    def security(self, kind: Kind) -> int:
        return self.sw_security if kind == Kind.SOFTWARE else self.hw_security


@dataclass(frozen=True)
class ComponentSpec:
    """
    One component of a system model.

    Attributes:
        id: Component identifier, unique within a SystemModel
        allowed_kinds: Implementation kinds the component may be mapped to
        inputs: Input ports, in declaration order
        outputs: Output ports, in declaration order
        costs: Cost annotation
        behavior: Name of the behavior in the registry
        params: Free-form string parameters read by the behavior
    """
    id: str
    allowed_kinds: FrozenSet[Kind]
    inputs: Tuple[PortSpec, ...] = ()
    outputs: Tuple[PortSpec, ...] = ()
    costs: CostAnnotation = field(default_factory=CostAnnotation)
    behavior: str = "echo"
    params: Dict[str, str] = field(default_factory=dict)

    @property
    def ports(self) -> Tuple[PortSpec, ...]:
        return self.inputs + self.outputs

    @property
    def is_dual_kind(self) -> bool:
        return len(self.allowed_kinds) > 1

    def input_port(self, name: str) -> Optional[PortSpec]:
        return next((p for p in self.inputs if p.name == name), None)

    def output_port(self, name: str) -> Optional[PortSpec]:
        return next((p for p in self.outputs if p.name == name), None)

    def input_names(self) -> FrozenSet[str]:
        return frozenset(p.name for p in self.inputs)


def make_ports(direction: Direction, pairs: Iterable[Tuple[str, DataTag]]) -> Tuple[PortSpec, ...]:
    """Build a port tuple from (name, tag) pairs."""
    return tuple(PortSpec(name, direction, tag) for name, tag in pairs)


# =============================================================================
# Messages and the Behavior Contract
# =============================================================================

@dataclass(frozen=True)
class Message:
    tag: DataTag
    payload: bytes
    origin: Endpoint


@dataclass
class BehaviorResult:
    outputs: Dict[str, Message] = field(default_factory=dict)
    state: Any = None


@dataclass
class BehaviorCall:
    """
    Everything a behavior sees during one firing.

    Attributes:
        component: The firing component's spec
        inputs: Consumed input messages keyed by input port name
        state: Component-local state from the previous firing
        seed: numpy SeedSequence for this firing
    """
    component: ComponentSpec
    inputs: Dict[str, Message]
    state: Any
    seed: np.random.SeedSequence

    def has(self, port: str) -> bool:
        return port in self.inputs

    def input(self, port: str) -> Message:
        """
        Return the message consumed at an input port.

        Raises:
            MissingInput: If the port holds no message this firing
        """
        try:
            return self.inputs[port]
        except KeyError:
            raise MissingInput(self.component.id, port) from None

    def payload(self, port: str) -> bytes:
        return self.input(port).payload

    def param(self, name: str, default: Optional[str] = None) -> Optional[str]:
        return self.component.params.get(name, default)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def emit(self, port: str, payload: bytes) -> Message:
        """
        Build a message for one of the component's output ports.

        Raises:
            TagDiscipline: If the port is not a declared output
        """
        spec = self.component.output_port(port)
        if spec is None:
            raise TagDiscipline(f"component {self.component.id!r} has no output port {port!r}")
        return Message(spec.tag, bytes(payload), (self.component.id, port))

    def result(self, state: Any = None, **payloads: bytes) -> BehaviorResult:
        """Shorthand: emit one message per keyword and return them with state."""
        return BehaviorResult({port: self.emit(port, data) for port, data in payloads.items()}, state)


BehaviorFn = Callable[[BehaviorCall], BehaviorResult]


@dataclass(frozen=True)
class Behavior:
    """
    A named behavior.

    `required` lists the input ports that must hold a message before the
    component may fire; None means every declared input is required.
    """
    name: str
    fn: BehaviorFn
    required: Optional[FrozenSet[str]] = None
    description: str = ""

    def required_inputs(self, component: ComponentSpec) -> FrozenSet[str]:
        if self.required is None:
            return component.input_names()
        return self.required

    def __call__(self, call: BehaviorCall) -> BehaviorResult:
        return self.fn(call)


class BehaviorRegistry:
    """Name -> Behavior table shared by validation and execution."""

    def __init__(self, behaviors: Iterable[Behavior] = ()):
        self._behaviors: Dict[str, Behavior] = {}
        for behavior in behaviors:
            self.add(behavior)

    def register(
        self,
        name: str,
        fn: BehaviorFn,
        required: Optional[Iterable[str]] = None,
        description: str = "",
    ) -> Behavior:
        """
        Register a behavior under a name.

        Args:
            name: Behavior name referenced by ComponentSpec.behavior
            fn: The behavior callable
            required: Required input ports (None = all declared inputs)
            description: One-line description

        Returns:
            The registered Behavior handle

        Raises:
            DuplicateBehavior: If the name is already registered
        """
        behavior = Behavior(
            name, fn,
            None if required is None else frozenset(required),
            description,
        )
        return self.add(behavior)

    def add(self, behavior: Behavior) -> Behavior:
        if behavior.name in self._behaviors:
            raise DuplicateBehavior(f"behavior {behavior.name!r} is already registered")
        self._behaviors[behavior.name] = behavior
        return behavior

    def resolve(self, name: str) -> Behavior:
        try:
            return self._behaviors[name]
        except KeyError:
            raise BehaviorNotFound(f"no behavior named {name!r}") from None

    def names(self) -> List[str]:
        return sorted(self._behaviors)

    def copy(self) -> "BehaviorRegistry":
        return BehaviorRegistry(self._behaviors.values())

    def __contains__(self, name: str) -> bool:
        return name in self._behaviors

    def __len__(self) -> int:
        return len(self._behaviors)


# =============================================================================
# Component Validation
# =============================================================================

def component_violations(spec: ComponentSpec, registry: BehaviorRegistry) -> List[Violation]:
    """Collect every violation of the ComponentSpec invariants."""
    found: List[Violation] = []
    cid = spec.id

    if not spec.id:
        found.append(Violation("EmptyIdentifier", "component id is empty", component=cid, field="id"))

    if not spec.allowed_kinds:
        found.append(Violation("EmptyKinds", f"component {cid!r} allows no implementation kind",
                               component=cid, field="kinds"))

    for direction, ports in (("inputs", spec.inputs), ("outputs", spec.outputs)):
        seen = set()
        for port in ports:
            if port.name in seen:
                found.append(Violation("DuplicatePort", f"component {cid!r} declares {direction} port "
                                       f"{port.name!r} twice", component=cid, port=port.name,
                                       field=direction))
            seen.add(port.name)
            if not port.tag:
                found.append(Violation("EmptyTag", f"port {cid}.{port.name} has an empty data tag",
                                       component=cid, port=port.name, field=direction))

    for name in COST_DECIMAL_FIELDS:
        value = Decimal(getattr(spec.costs, name))
        if not value.is_finite() or value < 0:
            found.append(Violation("NegativeCost", f"component {cid!r}: {name} = {value} must be "
                                   f"finite and >= 0", component=cid, field=f"costs.{name}"))
        elif fraction_digits(value) > 6:
            found.append(Violation("CostPrecision", f"component {cid!r}: {name} = {value} is finer "
                                   f"than one micro-unit", component=cid, field=f"costs.{name}"))

    for name in COST_SECURITY_FIELDS:
        level = getattr(spec.costs, name)
        if isinstance(level, bool) or not isinstance(level, int) or not SECURITY_MIN <= level <= SECURITY_MAX:
            found.append(Violation("InvalidSecurity", f"component {cid!r}: {name} = {level} is outside "
                                   f"[{SECURITY_MIN}, {SECURITY_MAX}]", component=cid, field=f"costs.{name}"))

    if spec.behavior not in registry:
        found.append(Violation("UnknownBehavior", f"component {cid!r} uses unknown behavior "
                               f"{spec.behavior!r}", component=cid, field="behavior"))
    else:
        declared = spec.input_names()
        for port in sorted(registry.resolve(spec.behavior).required_inputs(spec) - declared):
            found.append(Violation("UndeclaredPort", f"behavior {spec.behavior!r} requires input "
                                   f"{port!r} which {cid!r} does not declare", component=cid,
                                   port=port, field="inputs"))
    return found


def validate_component(spec: ComponentSpec, registry: BehaviorRegistry) -> ComponentSpec:
    """
    Check a component spec against its invariants.

    Returns:
        The spec itself when valid

    Raises:
        ValidationFailed: With every violation found
    """
    found = component_violations(spec, registry)
    if found:
        raise ValidationFailed(found)
    return spec
