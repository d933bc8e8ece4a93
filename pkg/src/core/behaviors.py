"""
Generic builtin behaviors.

These cover plumbing that does not belong to any application: forwarding
data, absorbing it, and emitting routing labels for exclusive choices.
`default_registry()` also pulls in the DRM component behaviors.
"""

from typing import List

from core.model import Behavior, BehaviorCall, BehaviorRegistry, BehaviorResult


GUARD_PORT = "choice"


def _labels(call: BehaviorCall) -> List[str]:
    labels = call.param("labels")
    if labels:
        return [label.strip() for label in labels.split(",") if label.strip()]
    label = call.param("label")
    return [label] if label is not None else []


def echo(call: BehaviorCall) -> BehaviorResult:
    """
    Forward input payloads to the outputs.

    An output port with a same-named input gets that input's payload; every
    other output gets the concatenation of all inputs in port-name order.
    """
    joined = b"".join(call.inputs[name].payload for name in sorted(call.inputs))
    outputs = {}
    for port in call.component.outputs:
        if port.name in call.inputs:
            outputs[port.name] = call.emit(port.name, call.inputs[port.name].payload)
        else:
            outputs[port.name] = call.emit(port.name, joined)
    return BehaviorResult(outputs, call.state)


def sink(call: BehaviorCall) -> BehaviorResult:
    """Absorb all inputs; state counts firings."""
    return BehaviorResult({}, (call.state or 0) + 1)


def choose(call: BehaviorCall) -> BehaviorResult:
    """
    Emit a routing label on the guard port.

    Reads `label`, or cycles through the comma-separated `labels` by firing
    count. The guard port name defaults to "choice" (param `port`).
    """
    count = call.state or 0
    labels = _labels(call)
    label = labels[count % len(labels)] if labels else ""
    port = call.param("port", GUARD_PORT)
    return BehaviorResult({port: call.emit(port, label.encode("utf-8"))}, count + 1)


def random_choice(call: BehaviorCall) -> BehaviorResult:
    """Emit one of `labels`, drawn from the firing's seeded generator."""
    labels = _labels(call)
    label = labels[int(call.rng().integers(len(labels)))] if labels else ""
    port = call.param("port", GUARD_PORT)
    return BehaviorResult({port: call.emit(port, label.encode("utf-8"))}, call.state)


GENERIC_BEHAVIORS = (
    Behavior("echo", echo, None, "forward inputs to outputs"),
    Behavior("sink", sink, None, "absorb inputs"),
    Behavior("choose", choose, frozenset(), "emit a fixed or cycling routing label"),
    Behavior("random_choice", random_choice, frozenset(), "emit a seeded random routing label"),
)


def generic_registry() -> BehaviorRegistry:
    """Registry holding only the generic builtins."""
    return BehaviorRegistry(GENERIC_BEHAVIORS)


def default_registry() -> BehaviorRegistry:
    """Registry holding the generic builtins plus the DRM component behaviors."""
    from drm.behaviors import DRM_BEHAVIORS

    registry = generic_registry()
    for behavior in DRM_BEHAVIORS:
        registry.add(behavior)
    return registry
