"""
Scheduling-and-parallelism graph, interaction graph and system model.

The scheduling graph orders component executions through connectors
(sequence, parallel, exclusive choice, synchronization); the interaction
graph carries typed data between output and input ports. `validate_system`
checks every structural rule of both at once and reports all violations.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from constants.kinds import ConnectorKind
from core.errors import ValidationFailed, Violation
from core.model import BehaviorRegistry, ComponentSpec, Endpoint, component_violations


logger = logging.getLogger(__name__)


# =============================================================================
# Graph Types
# =============================================================================

@dataclass(frozen=True)
class SchedulingConnector:
    """
    One connector of the scheduling graph.

    Attributes:
        id: Connector identifier
        kind: seq / par / xor / sync
        sources: Source component ids (ordered, no repeats)
        targets: Target component ids (ordered, no repeats)
        guard_port: (component, output port) carrying the routing label (xor only)
        labels: target id -> branch label (xor only)
        default_target: Target taken when no label matches (xor only)
    """
    id: str
    kind: ConnectorKind
    sources: Tuple[str, ...]
    targets: Tuple[str, ...]
    guard_port: Optional[Endpoint] = None
    labels: Dict[str, str] = field(default_factory=dict)
    default_target: Optional[str] = None

    def target_for(self, label: Optional[str]) -> Optional[str]:
        """Resolve a routing label to a target (falls back to the default)."""
        for target in self.targets:
            if label is not None and self.labels.get(target) == label:
                return target
        return self.default_target


@dataclass(frozen=True)
class SchedulingGraph:
    fsc: FrozenSet[str]
    connectors: Tuple[SchedulingConnector, ...]
    initial: str
    finals: FrozenSet[str]

    def outgoing(self, component: str) -> List[SchedulingConnector]:
        """Connectors having `component` among their sources, in declaration order."""
        return [c for c in self.connectors if component in c.sources]

    def targeted(self) -> Set[str]:
        return {t for c in self.connectors for t in c.targets}


@dataclass(frozen=True)
class InteractionEdge:
    source: Endpoint
    target: Endpoint


@dataclass(frozen=True)
class InteractionGraph:
    edges: Tuple[InteractionEdge, ...] = ()

    def feeders(self, component: str, port: str) -> List[InteractionEdge]:
        return [e for e in self.edges if e.target == (component, port)]

    def outgoing(self, component: str) -> List[Tuple[int, InteractionEdge]]:
        """(index, edge) pairs leaving `component`, in declaration order."""
        return [(i, e) for i, e in enumerate(self.edges) if e.source[0] == component]


@dataclass(frozen=True)
class SystemModel:
    name: str
    components: Dict[str, ComponentSpec]
    spg: SchedulingGraph
    ig: InteractionGraph

    def component(self, component_id: str) -> ComponentSpec:
        return self.components[component_id]

    def dual_kind_components(self) -> List[str]:
        return sorted(cid for cid, spec in self.components.items() if spec.is_dual_kind)


# =============================================================================
# Reachability
# =============================================================================

def reachable_components(spg: SchedulingGraph) -> Set[str]:
    """
    Least fixed point of connector traversal from the initial component.

    A connector contributes its targets once all of its sources are
    reachable (a synchronization needs every branch, other kinds have a
    single source).
    """
    reached = {spg.initial}
    changed = True
    while changed:
        changed = False
        for connector in spg.connectors:
            if all(s in reached for s in connector.sources):
                new = set(connector.targets) - reached
                if new:
                    reached |= new
                    changed = True
    return reached


def _can_reach_final(spg: SchedulingGraph) -> Set[str]:
    """Components from which some final component is reachable."""
    good = set(spg.finals)
    changed = True
    while changed:
        changed = False
        for connector in spg.connectors:
            if any(t in good for t in connector.targets):
                new = set(connector.sources) - good
                if new:
                    good |= new
                    changed = True
    return good


# =============================================================================
# Interface Compatibility
# =============================================================================

class EdgeStatus(str, Enum):
    SYNTACTIC_OK = "SyntacticOk"
    TAG_OK = "TagOk"
    TAG_MISMATCH = "TagMismatch"
    UNKNOWN_PORT = "UnknownPort"


def edge_status(model: SystemModel, edge: InteractionEdge) -> EdgeStatus:
    """UnknownPort, SyntacticOk when a port carries no tag to compare, else TagOk or TagMismatch."""
    source = model.components.get(edge.source[0])
    target = model.components.get(edge.target[0])
    out_port = source.output_port(edge.source[1]) if source else None
    in_port = target.input_port(edge.target[1]) if target else None
    if out_port is None or in_port is None:
        return EdgeStatus.UNKNOWN_PORT
    if not out_port.tag or not in_port.tag:
        return EdgeStatus.SYNTACTIC_OK
    if out_port.tag != in_port.tag:
        return EdgeStatus.TAG_MISMATCH
    return EdgeStatus.TAG_OK


def compatibility_report(model: SystemModel) -> List[Tuple[InteractionEdge, EdgeStatus]]:
    """Per-edge compatibility verdict, covering every interaction edge."""
    return [(edge, edge_status(model, edge)) for edge in model.ig.edges]


# =============================================================================
# System Validation
# =============================================================================

ARITY = {
    ConnectorKind.SEQUENCE: (lambda s, t: s == 1 and t == 1, "1 source and 1 target"),
    ConnectorKind.PARALLEL: (lambda s, t: s == 1 and t >= 2, "1 source and at least 2 targets"),
    ConnectorKind.EXCLUSIVE_CHOICE: (lambda s, t: s == 1 and t >= 2, "1 source and at least 2 targets"),
    ConnectorKind.SYNCHRONIZATION: (lambda s, t: s >= 2 and t == 1, "at least 2 sources and 1 target"),
}


class _Collector:
    def __init__(self):
        self.violations: List[Violation] = []

    def add(self, category: str, message: str, **where):
        self.violations.append(Violation(category, message, **where))


def _check_components(model: SystemModel, registry: BehaviorRegistry, out: _Collector):
    for key in sorted(model.components):
        spec = model.components[key]
        if spec.id != key:
            out.add("IdMismatch", f"component stored as {key!r} has id {spec.id!r}", component=key)
        out.violations.extend(component_violations(spec, registry))

    declared = set(model.components)
    for cid in sorted(model.spg.fsc - declared):
        out.add("UnknownComponent", f"scheduling graph names undeclared component {cid!r}",
                component=cid, field="spg")
    for cid in sorted(declared - model.spg.fsc):
        out.add("FscMismatch", f"component {cid!r} is not part of the scheduling graph", component=cid)


def _check_spg_ends(spg: SchedulingGraph, out: _Collector):
    if spg.initial not in spg.fsc:
        out.add("UnknownComponent", f"initial component {spg.initial!r} is unknown",
                component=spg.initial, field="spg.initial")
    if not spg.finals:
        out.add("EmptyFinals", "the scheduling graph declares no final component", field="spg.finals")
    for final in sorted(spg.finals - spg.fsc):
        out.add("UnknownComponent", f"final component {final!r} is unknown",
                component=final, field="spg.finals")


def _check_connector(conn: SchedulingConnector, model: SystemModel, out: _Collector):
    spg = model.spg
    for cid in conn.sources + conn.targets:
        if cid not in spg.fsc:
            out.add("UnknownComponent", f"connector {conn.id!r} names unknown component {cid!r}",
                    connector=conn.id, component=cid)

    check, expected = ARITY[conn.kind]
    if not check(len(conn.sources), len(conn.targets)):
        out.add("ArityViolation", f"{conn.kind.title} connector {conn.id!r} needs {expected}, has "
                f"{len(conn.sources)} source(s) and {len(conn.targets)} target(s)", connector=conn.id)
    if len(set(conn.sources)) != len(conn.sources) or len(set(conn.targets)) != len(conn.targets):
        out.add("ArityViolation", f"{conn.kind.title} connector {conn.id!r} repeats an endpoint",
                connector=conn.id)

    if conn.kind != ConnectorKind.EXCLUSIVE_CHOICE:
        if conn.guard_port is not None or conn.labels or conn.default_target is not None:
            out.add("UnexpectedChoiceFields", f"{conn.kind.title} connector {conn.id!r} carries "
                    f"guard_port/labels/default", connector=conn.id)
        return

    guard = conn.guard_port
    if guard is None:
        out.add("DanglingGuard", f"exclusive choice {conn.id!r} has no guard port", connector=conn.id)
    elif guard[0] not in conn.sources:
        out.add("DanglingGuard", f"guard port {guard[0]}.{guard[1]} of {conn.id!r} is not owned by "
                f"its source", connector=conn.id, component=guard[0], port=guard[1])
    else:
        owner = model.components.get(guard[0])
        if owner is not None and owner.output_port(guard[1]) is None:
            out.add("DanglingGuard", f"guard port {guard[0]}.{guard[1]} of {conn.id!r} is not an "
                    f"output port", connector=conn.id, component=guard[0], port=guard[1])

    for target in conn.targets:
        if target not in conn.labels:
            out.add("MissingLabel", f"target {target!r} of {conn.id!r} has no branch label",
                    connector=conn.id, component=target)
    for target in conn.labels:
        if target not in conn.targets:
            out.add("UnknownLabelTarget", f"{conn.id!r} labels {target!r} which is not a target",
                    connector=conn.id, component=target)
    for label, count in sorted(Counter(conn.labels.values()).items()):
        if count > 1:
            out.add("DuplicateLabel", f"label {label!r} is used {count} times in {conn.id!r}",
                    connector=conn.id)
    if conn.default_target is not None and conn.default_target not in conn.targets:
        out.add("BadDefault", f"default {conn.default_target!r} of {conn.id!r} is not a target",
                connector=conn.id, component=conn.default_target)


def _check_connectors(model: SystemModel, out: _Collector):
    spg = model.spg
    seen = set()
    for conn in spg.connectors:
        if conn.id in seen:
            out.add("DuplicateConnector", f"connector id {conn.id!r} is declared twice", connector=conn.id)
        seen.add(conn.id)
        _check_connector(conn, model, out)

    targeted = spg.targeted()
    if spg.initial in targeted:
        for conn in spg.connectors:
            if spg.initial in conn.targets:
                out.add("InitialIsTarget", f"initial component {spg.initial!r} is a target of "
                        f"{conn.id!r}", connector=conn.id, component=spg.initial)
    for cid in sorted(spg.fsc - targeted - {spg.initial}):
        if cid in spg.finals:
            out.add("FinalNotTargeted", f"final component {cid!r} is never scheduled", component=cid)
        else:
            out.add("Untargeted", f"component {cid!r} is the target of no connector", component=cid)


def _check_edges(model: SystemModel, out: _Collector):
    seen = set()
    for index, edge in enumerate(model.ig.edges):
        if edge in seen:
            out.add("DuplicateEdge", f"interaction edge {edge.source} -> {edge.target} is declared twice",
                    edge=index)
        seen.add(edge)

        source = model.components.get(edge.source[0])
        target = model.components.get(edge.target[0])
        for cid, spec in ((edge.source[0], source), (edge.target[0], target)):
            if spec is None:
                out.add("UnknownComponent", f"interaction edge {index} names unknown component {cid!r}",
                        edge=index, component=cid)
        if source is None or target is None:
            continue

        out_port = source.output_port(edge.source[1])
        in_port = target.input_port(edge.target[1])
        if out_port is None:
            out.add("UnknownPort", f"{edge.source[0]!r} has no output port {edge.source[1]!r}",
                    edge=index, component=edge.source[0], port=edge.source[1])
        if in_port is None:
            out.add("UnknownPort", f"{edge.target[0]!r} has no input port {edge.target[1]!r}",
                    edge=index, component=edge.target[0], port=edge.target[1])
        if out_port is not None and in_port is not None and out_port.tag != in_port.tag:
            out.add("TagMismatch", f"expected {in_port.tag!r}, found {out_port.tag!r} on edge "
                    f"{edge.source[0]}.{edge.source[1]} -> {edge.target[0]}.{edge.target[1]}",
                    edge=index, component=edge.target[0], port=edge.target[1])


def _check_flow(model: SystemModel, registry: BehaviorRegistry, out: _Collector):
    spg = model.spg
    reached = reachable_components(spg)
    for cid in sorted(spg.fsc - reached):
        out.add("Unreachable", f"component {cid!r} is unreachable from {spg.initial!r}", component=cid)

    finishing = _can_reach_final(spg)
    for cid in sorted((reached & spg.fsc) - finishing):
        out.add("NoPathToFinal", f"no final component is reachable from {cid!r}", component=cid)

    for cid in sorted(reached):
        spec = model.components.get(cid)
        if spec is None or cid == spg.initial or spec.behavior not in registry:
            continue
        required = registry.resolve(spec.behavior).required_inputs(spec)
        for port in spec.inputs:
            if port.name in required and not model.ig.feeders(cid, port.name):
                out.add("UnfedInput", f"required input {cid}.{port.name} has no interaction edge",
                        component=cid, port=port.name)


def system_violations(model: SystemModel, registry: Optional[BehaviorRegistry] = None) -> List[Violation]:
    """Collect every violation of the system model's structural rules."""
    if registry is None:
        from core.behaviors import default_registry
        registry = default_registry()

    out = _Collector()
    _check_components(model, registry, out)
    _check_spg_ends(model.spg, out)
    _check_connectors(model, out)
    _check_edges(model, out)
    _check_flow(model, registry, out)
    return out.violations


def validate_system(model: SystemModel, registry: Optional[BehaviorRegistry] = None) -> SystemModel:
    """
    Validate a system model.

    Args:
        model: The model to check
        registry: Behavior registry (defaults to the builtin one)

    Returns:
        The model itself when every rule holds

    Raises:
        ValidationFailed: With all violations, each carrying coordinates
    """
    found = system_violations(model, registry)
    if found:
        logger.debug("model %r failed validation with %d violation(s)", model.name, len(found))
        raise ValidationFailed(found)
    return model


def build_system(
    name: str,
    components: Iterable[ComponentSpec],
    connectors: Iterable[SchedulingConnector],
    initial: str,
    finals: Iterable[str],
    edges: Iterable[Tuple[Endpoint, Endpoint]] = (),
) -> SystemModel:
    """Assemble a SystemModel whose FSC is the set of component ids."""
    table = {spec.id: spec for spec in components}
    spg = SchedulingGraph(frozenset(table), tuple(connectors), initial, frozenset(finals))
    ig = InteractionGraph(tuple(InteractionEdge(tuple(s), tuple(t)) for s, t in edges))
    return SystemModel(name, table, spg, ig)
