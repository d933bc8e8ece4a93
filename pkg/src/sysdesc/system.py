"""
System description files (.f4ms).

Maps the canonical tree syntax onto SystemModel. Parsing runs three
passes, each reporting every problem it finds: syntax (tree.py), schema
(shape and types of every entry, with field paths) and model validation
(graph rules, located back onto the node that caused them).
"""

import logging
from decimal import Decimal
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from constants.kinds import ALL_KINDS, ConnectorKind, Direction, Kind, parse_connector_kind
from core.errors import Violation
from core.graph import (
    InteractionEdge, InteractionGraph, SchedulingConnector, SchedulingGraph,
    SystemModel, system_violations,
)
from core.model import BehaviorRegistry, ComponentSpec, CostAnnotation, PortSpec
from sysdesc.tree import (
    Diagnostic, Node, SourceLocation, SystemDescriptionError, dumps, parse_tree,
)


logger = logging.getLogger(__name__)

TOP_KEYS = ("name", "components", "spg", "ig")
COMPONENT_KEYS = ("id", "kinds", "inputs", "outputs", "costs", "behavior")
COMPONENT_OPTIONAL_KEYS = ("params",)
PORT_KEYS = ("name", "tag")
COST_KEYS = ("sw_time", "hw_time", "hw_area", "sw_energy", "hw_energy", "sw_security", "hw_security")
SPG_KEYS = ("initial", "finals", "connectors")
CONNECTOR_KEYS = ("id", "kind", "from", "to")
CONNECTOR_OPTIONAL_KEYS = ("guard_port", "labels", "default")
EDGE_KEYS = ("from", "to")


# =============================================================================
# Schema Pass
# =============================================================================

class _SchemaReader:
    """Walks the positioned tree, building model parts and collecting SchemaErrors."""

    def __init__(self, file: str):
        self.file = file
        self.diagnostics: List[Diagnostic] = []
        # Nodes by path, used to locate validation violations afterwards
        self.component_nodes: Dict[str, Tuple[str, Node]] = {}
        self.connector_nodes: List[Tuple[str, Node]] = []
        self.edge_nodes: List[Tuple[str, Node]] = []
        self.spg_node: Optional[Node] = None

    def error(self, node: Node, path: str, message: str):
        self.diagnostics.append(Diagnostic(
            "SchemaError", SourceLocation(self.file, node.line, node.column, path),
            f"{path}: {message}" if path else message))

    # -- shape helpers --------------------------------------------------------

    def fields(self, node: Node, path: str, required, optional=()) -> Optional[Dict[str, Node]]:
        if node.kind != "object":
            self.error(node, path, f"expected an object, found {node.kind}")
            return None
        for key in required:
            if key not in node.value:
                self.error(node, path, f"missing key {key!r}")
        for key, key_node in node.keys.items():
            if key not in required and key not in optional:
                self.error(key_node, path, f"unknown key {key!r}")
        return node.value

    def string(self, node: Optional[Node], path: str) -> Optional[str]:
        if node is None:
            return None
        if node.kind != "string":
            self.error(node, path, f"expected a string, found {node.kind}")
            return None
        if not node.value:
            self.error(node, path, "must not be empty")
            return None
        return node.value

    def array(self, node: Optional[Node], path: str) -> List[Node]:
        if node is None:
            return []
        if node.kind != "array":
            self.error(node, path, f"expected a list, found {node.kind}")
            return []
        return node.value

    def strings(self, node: Optional[Node], path: str) -> Optional[List[str]]:
        if node is None:
            return None
        items = [self.string(item, f"{path}[{i}]") for i, item in enumerate(self.array(node, path))]
        return None if any(i is None for i in items) or node.kind != "array" else items

    def endpoint(self, node: Optional[Node], path: str) -> Optional[Tuple[str, str]]:
        pair = self.strings(node, path)
        if pair is None:
            return None
        if len(pair) != 2:
            self.error(node, path, "expected [component, port]")
            return None
        return pair[0], pair[1]

    def decimal(self, node: Optional[Node], path: str) -> Optional[Decimal]:
        if node is None:
            return None
        if node.kind != "number":
            self.error(node, path, f"expected a number, found {node.kind}")
            return None
        return Decimal(node.value)

    def integer(self, node: Optional[Node], path: str) -> Optional[int]:
        if node is None:
            return None
        if node.kind != "number" or not isinstance(node.value, int):
            self.error(node, path, "expected an integer")
            return None
        return node.value

    # -- sections -------------------------------------------------------------

    def ports(self, node: Optional[Node], path: str, direction: Direction) -> Optional[Tuple[PortSpec, ...]]:
        ports = []
        ok = node is not None and node.kind == "array"
        for i, item in enumerate(self.array(node, path)):
            fields = self.fields(item, f"{path}[{i}]", PORT_KEYS)
            if fields is None:
                ok = False
                continue
            name = self.string(fields.get("name"), f"{path}[{i}].name")
            tag = self.string(fields.get("tag"), f"{path}[{i}].tag")
            if name is None or tag is None:
                ok = False
                continue
            ports.append(PortSpec(name, direction, tag))
        return tuple(ports) if ok else None

    def costs(self, node: Optional[Node], path: str) -> Optional[CostAnnotation]:
        if node is None:
            return None
        fields = self.fields(node, path, COST_KEYS)
        if fields is None:
            return None
        values = {}
        for key in COST_KEYS:
            read = self.integer if key.endswith("_security") else self.decimal
            values[key] = read(fields.get(key), f"{path}.{key}")
        if any(v is None for v in values.values()):
            return None
        return CostAnnotation(**values)

    def kinds(self, node: Optional[Node], path: str) -> Optional[frozenset]:
        names = self.strings(node, path)
        if names is None:
            return None
        kinds = set()
        for i, name in enumerate(names):
            if name not in {k.value for k in ALL_KINDS}:
                self.error(node.value[i], f"{path}[{i}]", f"unknown kind {name!r} (expected SW or HW)")
                return None
            kinds.add(Kind(name))
        return frozenset(kinds)

    def params(self, node: Optional[Node], path: str) -> Optional[Dict[str, str]]:
        if node is None:
            return {}
        if node.kind != "object":
            self.error(node, path, f"expected an object, found {node.kind}")
            return None
        result = {}
        for key, value in node.value.items():
            if value.kind != "string":
                self.error(value, f"{path}.{key}", "parameter values must be strings")
                return None
            result[key] = value.value
        return result

    def component(self, node: Node, path: str) -> Optional[ComponentSpec]:
        fields = self.fields(node, path, COMPONENT_KEYS, COMPONENT_OPTIONAL_KEYS)
        if fields is None:
            return None
        cid = self.string(fields.get("id"), f"{path}.id")
        parts = dict(
            id=cid,
            allowed_kinds=self.kinds(fields.get("kinds"), f"{path}.kinds"),
            inputs=self.ports(fields.get("inputs"), f"{path}.inputs", Direction.INPUT),
            outputs=self.ports(fields.get("outputs"), f"{path}.outputs", Direction.OUTPUT),
            costs=self.costs(fields.get("costs"), f"{path}.costs"),
            behavior=self.string(fields.get("behavior"), f"{path}.behavior"),
            params=self.params(fields.get("params"), f"{path}.params"),
        )
        if any(v is None for v in parts.values()):
            return None
        if cid in self.component_nodes:
            self.error(fields["id"], f"{path}.id", f"duplicate component id {cid!r}")
            return None
        self.component_nodes[cid] = (path, node)
        return ComponentSpec(**parts)

    def connector(self, node: Node, path: str) -> Optional[SchedulingConnector]:
        fields = self.fields(node, path, CONNECTOR_KEYS, CONNECTOR_OPTIONAL_KEYS)
        if fields is None:
            return None
        self.connector_nodes.append((path, node))
        cid = self.string(fields.get("id"), f"{path}.id")
        kind_text = self.string(fields.get("kind"), f"{path}.kind")
        kind = None
        if kind_text is not None:
            try:
                kind = parse_connector_kind(kind_text)
            except ValueError:
                self.error(fields["kind"], f"{path}.kind",
                           f"unknown connector kind {kind_text!r} (expected seq, par, xor or sync)")
        sources = self.strings(fields.get("from"), f"{path}.from")
        targets = self.strings(fields.get("to"), f"{path}.to")
        guard = self.endpoint(fields.get("guard_port"), f"{path}.guard_port")
        default = self.string(fields.get("default"), f"{path}.default")

        labels = {}
        labels_node = fields.get("labels")
        if labels_node is not None:
            if labels_node.kind != "object":
                self.error(labels_node, f"{path}.labels", f"expected an object, found {labels_node.kind}")
                labels = None
            else:
                for target, label in labels_node.value.items():
                    text = self.string(label, f"{path}.labels.{target}")
                    if text is None:
                        labels = None
                        break
                    labels[target] = text

        if kind == ConnectorKind.EXCLUSIVE_CHOICE:
            if "guard_port" not in fields:
                self.error(node, path, "exclusive choice requires 'guard_port'")
            if "labels" not in fields:
                self.error(node, path, "exclusive choice requires branch 'labels'")
            if "guard_port" not in fields or "labels" not in fields:
                return None

        if None in (cid, kind, sources, targets, labels) or ("guard_port" in fields and guard is None) \
                or ("default" in fields and default is None):
            return None
        return SchedulingConnector(cid, kind, tuple(sources), tuple(targets), guard, labels, default)

    def spg(self, node: Optional[Node], path: str = "spg"):
        if node is None:
            return None
        self.spg_node = node
        fields = self.fields(node, path, SPG_KEYS)
        if fields is None:
            return None
        initial = self.string(fields.get("initial"), f"{path}.initial")
        finals = self.strings(fields.get("finals"), f"{path}.finals")
        connectors = [self.connector(item, f"{path}.connectors[{i}]")
                      for i, item in enumerate(self.array(fields.get("connectors"), f"{path}.connectors"))]
        if initial is None or finals is None or any(c is None for c in connectors):
            return None
        return initial, frozenset(finals), tuple(connectors)

    def edges(self, node: Optional[Node], path: str = "ig") -> Optional[Tuple[InteractionEdge, ...]]:
        if node is None:
            return None
        edges = []
        ok = node.kind == "array"
        for i, item in enumerate(self.array(node, path)):
            self.edge_nodes.append((f"{path}[{i}]", item))
            fields = self.fields(item, f"{path}[{i}]", EDGE_KEYS)
            if fields is None:
                ok = False
                continue
            source = self.endpoint(fields.get("from"), f"{path}[{i}].from")
            target = self.endpoint(fields.get("to"), f"{path}[{i}].to")
            if source is None or target is None:
                ok = False
                continue
            edges.append(InteractionEdge(source, target))
        return tuple(edges) if ok else None

    def system(self, root: Node) -> Optional[SystemModel]:
        fields = self.fields(root, "", TOP_KEYS)
        if fields is None:
            return None
        name = self.string(fields.get("name"), "name")
        components = {}
        for i, item in enumerate(self.array(fields.get("components"), "components")):
            spec = self.component(item, f"components[{i}]")
            if spec is not None:
                components[spec.id] = spec
        spg = self.spg(fields.get("spg"))
        edges = self.edges(fields.get("ig"))
        if self.diagnostics or name is None or spg is None or edges is None:
            return None
        initial, finals, connectors = spg
        return SystemModel(
            name, components,
            SchedulingGraph(frozenset(components), connectors, initial, finals),
            InteractionGraph(edges),
        )

    # -- validation locations -------------------------------------------------

    def locate(self, violation: Violation, root: Node) -> SourceLocation:
        path, node = "", root
        if violation.edge is not None and violation.edge < len(self.edge_nodes):
            path, node = self.edge_nodes[violation.edge]
        elif violation.connector is not None:
            match = [(p, n) for p, n in self.connector_nodes
                     if n.value.get("id") is not None and n.value["id"].value == violation.connector]
            if match:
                path, node = match[-1]
        elif violation.component is not None and violation.component in self.component_nodes:
            path, node = self.component_nodes[violation.component]
            path, node = self._descend(path, node, violation)
        elif violation.field and violation.field.startswith("spg") and self.spg_node is not None:
            path, node = "spg", self.spg_node
            key = violation.field.split(".", 1)[-1]
            if key in self.spg_node.value:
                path, node = violation.field, self.spg_node.value[key]
        elif violation.component is not None and self.spg_node is not None:
            path, node = "spg", self.spg_node
        return SourceLocation(self.file, node.line, node.column, path)

    @staticmethod
    def _descend(path: str, node: Node, violation: Violation) -> Tuple[str, Node]:
        if violation.port is not None:
            for section in ("inputs", "outputs"):
                ports = node.value.get(section)
                if ports is None or ports.kind != "array":
                    continue
                for i, port in enumerate(ports.value):
                    name = port.value.get("name") if port.kind == "object" else None
                    if name is not None and name.value == violation.port:
                        return f"{path}.{section}[{i}]", port
        if violation.field:
            current, current_path = node, path
            for key in violation.field.split("."):
                if current.kind != "object" or key not in current.value:
                    break
                current, current_path = current.value[key], f"{current_path}.{key}"
            return current_path, current
        return path, node


# =============================================================================
# Public API
# =============================================================================

def parse_system(
    text: str,
    file: str = "<string>",
    registry: Optional[BehaviorRegistry] = None,
) -> SystemModel:
    """
    Parse and validate a system description.

    Args:
        text: Description source
        file: File name used in diagnostics
        registry: Behavior registry for validation (default builtins)

    Returns:
        A SystemModel that passes validate_system

    Raises:
        SystemDescriptionError: With every SyntaxError, SchemaError or
            ValidationError diagnostic found
    """
    root = parse_tree(text, file)
    reader = _SchemaReader(file)
    model = reader.system(root)
    if model is None:
        raise SystemDescriptionError(reader.diagnostics)

    violations = system_violations(model, registry)
    if violations:
        raise SystemDescriptionError([
            Diagnostic("ValidationError", reader.locate(v, root), v.message, code=v.category)
            for v in violations
        ])
    logger.debug("parsed %s: %d components", file, len(model.components))
    return model


def parse_system_file(path: Union[str, Path], registry: Optional[BehaviorRegistry] = None) -> SystemModel:
    path = Path(path)
    return parse_system(path.read_text(encoding="utf-8"), str(path), registry)


def _costs_tree(costs: CostAnnotation) -> Dict[str, Any]:
    return {key: getattr(costs, key) for key in COST_KEYS}


def _component_tree(spec: ComponentSpec) -> Dict[str, Any]:
    tree = {
        "id": spec.id,
        "kinds": [k.value for k in ALL_KINDS if k in spec.allowed_kinds],
        "inputs": [{"name": p.name, "tag": p.tag} for p in spec.inputs],
        "outputs": [{"name": p.name, "tag": p.tag} for p in spec.outputs],
        "costs": _costs_tree(spec.costs),
        "behavior": spec.behavior,
    }
    if spec.params:
        tree["params"] = dict(sorted(spec.params.items()))
    return tree


def _connector_tree(conn: SchedulingConnector) -> Dict[str, Any]:
    tree = {
        "id": conn.id,
        "kind": conn.kind.value,
        "from": list(conn.sources),
        "to": list(conn.targets),
    }
    if conn.guard_port is not None:
        tree["guard_port"] = list(conn.guard_port)
    if conn.labels:
        # Label order follows the target order
        ordered = [t for t in conn.targets if t in conn.labels]
        ordered += sorted(t for t in conn.labels if t not in conn.targets)
        tree["labels"] = {t: conn.labels[t] for t in ordered}
    if conn.default_target is not None:
        tree["default"] = conn.default_target
    return tree


def model_to_tree(model: SystemModel) -> Dict[str, Any]:
    """Canonical tree for a model: fixed key order, components sorted by id."""
    return {
        "name": model.name,
        "components": [_component_tree(model.components[cid]) for cid in sorted(model.components)],
        "spg": {
            "initial": model.spg.initial,
            "finals": sorted(model.spg.finals),
            "connectors": [_connector_tree(c) for c in model.spg.connectors],
        },
        "ig": [{"from": list(e.source), "to": list(e.target)} for e in model.ig.edges],
    }


def serialize_system(model: SystemModel) -> str:
    """Canonical description text; parse_system(serialize_system(m)) == m."""
    return dumps(model_to_tree(model))
