from dataclasses import replace
from decimal import Decimal

import numpy as np
import pytest

from constants import ConnectorKind, Direction, Kind
from core.behaviors import echo, generic_registry
from core.errors import ValidationFailed
from core.graph import (
    EdgeStatus, InteractionEdge, InteractionGraph, SchedulingConnector, SchedulingGraph,
    build_system, compatibility_report, reachable_components, validate_system,
)
from core.model import ComponentSpec, CostAnnotation, PortSpec, make_ports
from factories import random_sp_model


SW = frozenset({Kind.SOFTWARE})
BOTH = frozenset({Kind.SOFTWARE, Kind.HARDWARE})
COSTS = CostAnnotation(Decimal(1), Decimal("0.5"), Decimal(2), Decimal(1), Decimal("0.5"), 2, 3)


def component(cid, inputs=(), outputs=(), behavior="echo", kinds=BOTH, **extra):
    return ComponentSpec(
        cid, kinds,
        make_ports(Direction.INPUT, inputs),
        make_ports(Direction.OUTPUT, outputs),
        COSTS, behavior, **extra,
    )


def base_model():
    """src forks to left/right, join synchronizes, gate picks done or alt."""
    components = [
        component("src", outputs=[("out", "data")]),
        component("left", [("in", "data")], [("out", "data")]),
        component("right", [("in", "data")], [("out", "data")]),
        component("join", [("a", "data"), ("b", "data")], [("out", "data")]),
        component("gate", outputs=[("choice", "label")], behavior="choose", params={"label": "done"}),
        component("done", [("in", "data")], behavior="sink", kinds=SW),
        component("alt", behavior="sink", kinds=SW),
    ]
    connectors = [
        SchedulingConnector("fork", ConnectorKind.PARALLEL, ("src",), ("left", "right")),
        SchedulingConnector("merge", ConnectorKind.SYNCHRONIZATION, ("left", "right"), ("join",)),
        SchedulingConnector("to_gate", ConnectorKind.SEQUENCE, ("join",), ("gate",)),
        SchedulingConnector("pick", ConnectorKind.EXCLUSIVE_CHOICE, ("gate",), ("done", "alt"),
                            guard_port=("gate", "choice"), labels={"done": "done", "alt": "alt"}),
    ]
    edges = [
        (("src", "out"), ("left", "in")),
        (("src", "out"), ("right", "in")),
        (("left", "out"), ("join", "a")),
        (("right", "out"), ("join", "b")),
        (("join", "out"), ("done", "in")),
    ]
    return build_system("mutation_base", components, connectors, "src", ["done", "alt"], edges)


# -- mutation helpers ---------------------------------------------------------

def with_component(model, cid, **changes):
    components = dict(model.components)
    components[cid] = replace(components[cid], **changes)
    return replace(model, components=components)


def add_component(model, spec, final=False):
    components = dict(model.components)
    components[spec.id] = spec
    finals = model.spg.finals | {spec.id} if final else model.spg.finals
    spg = replace(model.spg, fsc=frozenset(components), finals=finals)
    return replace(model, components=components, spg=spg)


def with_connector(model, index, **changes):
    connectors = list(model.spg.connectors)
    connectors[index] = replace(connectors[index], **changes)
    return replace(model, spg=replace(model.spg, connectors=tuple(connectors)))


def add_connector(model, connector):
    return replace(model, spg=replace(model.spg, connectors=model.spg.connectors + (connector,)))


def drop_connector(model, index):
    connectors = list(model.spg.connectors)
    del connectors[index]
    return replace(model, spg=replace(model.spg, connectors=tuple(connectors)))


def with_edges(model, edges):
    return replace(model, ig=InteractionGraph(tuple(edges)))


def edge(source, target):
    return InteractionEdge(tuple(source), tuple(target))


def needs_key_registry():
    registry = generic_registry()
    registry.register("needs_key", echo, required=["key"])
    return registry


MUTATIONS = {
    "duplicate port": (
        lambda m: with_component(m, "left", outputs=make_ports(Direction.OUTPUT, [("out", "data"), ("out", "data")])),
        "DuplicatePort"),
    "empty tag": (
        lambda m: with_component(m, "alt", outputs=(PortSpec("x", Direction.OUTPUT, ""),)),
        "EmptyTag"),
    "negative cost": (
        lambda m: with_component(m, "src", costs=replace(COSTS, hw_time=Decimal(-1))),
        "NegativeCost"),
    "security out of range": (
        lambda m: with_component(m, "src", costs=replace(COSTS, hw_security=6)),
        "InvalidSecurity"),
    "unknown behavior": (
        lambda m: with_component(m, "alt", behavior="teleport"),
        "UnknownBehavior"),
    "no kinds": (
        lambda m: with_component(m, "alt", allowed_kinds=frozenset()),
        "EmptyKinds"),
    "id mismatch": (
        lambda m: with_component(m, "alt", id="alt2"),
        "IdMismatch"),
    "sequence with two targets": (
        lambda m: with_connector(m, 2, targets=("gate", "alt")),
        "ArityViolation"),
    "parallel with one target": (
        lambda m: with_connector(m, 0, targets=("left",)),
        "ArityViolation"),
    "sync source dropped": (
        lambda m: with_connector(m, 1, sources=("left",)),
        "ArityViolation"),
    "repeated target": (
        lambda m: with_connector(m, 0, targets=("left", "left")),
        "ArityViolation"),
    "choice without guard": (
        lambda m: with_connector(m, 3, guard_port=None),
        "DanglingGuard"),
    "guard owned by another component": (
        lambda m: with_connector(m, 3, guard_port=("join", "out")),
        "DanglingGuard"),
    "guard is not an output": (
        lambda m: with_connector(m, 3, guard_port=("gate", "nope")),
        "DanglingGuard"),
    "unlabelled target": (
        lambda m: with_connector(m, 3, labels={"done": "done"}),
        "MissingLabel"),
    "label for a non-target": (
        lambda m: with_connector(m, 3, labels={"done": "done", "alt": "alt", "src": "src"}),
        "UnknownLabelTarget"),
    "duplicate label": (
        lambda m: with_connector(m, 3, labels={"done": "same", "alt": "same"}),
        "DuplicateLabel"),
    "default outside targets": (
        lambda m: with_connector(m, 3, default_target="join"),
        "BadDefault"),
    "labels on a sequence": (
        lambda m: with_connector(m, 2, labels={"gate": "x"}),
        "UnexpectedChoiceFields"),
    "duplicate connector id": (
        lambda m: add_connector(m, replace(m.spg.connectors[2], id="fork")),
        "DuplicateConnector"),
    "duplicate edge": (
        lambda m: with_edges(m, m.ig.edges + (m.ig.edges[0],)),
        "DuplicateEdge"),
    "edge to unknown port": (
        lambda m: with_edges(m, m.ig.edges + (edge(("src", "out"), ("alt", "nope")),)),
        "UnknownPort"),
    "edge to unknown component": (
        lambda m: with_edges(m, m.ig.edges + (edge(("src", "out"), ("ghost", "in")),)),
        "UnknownComponent"),
    "port renamed": (
        lambda m: with_component(m, "right", inputs=make_ports(Direction.INPUT, [("input", "data")])),
        "UnknownPort"),
    "tag mismatch": (
        lambda m: with_component(m, "right", inputs=make_ports(Direction.INPUT, [("in", "key")])),
        "TagMismatch"),
    "feeding edge deleted": (
        lambda m: with_edges(m, [e for e in m.ig.edges if e.target != ("join", "a")]),
        "UnfedInput"),
    "unknown initial": (
        lambda m: replace(m, spg=replace(m.spg, initial="nobody")),
        "UnknownComponent"),
    "no finals": (
        lambda m: replace(m, spg=replace(m.spg, finals=frozenset())),
        "EmptyFinals"),
    "unknown final": (
        lambda m: replace(m, spg=replace(m.spg, finals=m.spg.finals | {"nobody"})),
        "UnknownComponent"),
    "connector names unknown component": (
        lambda m: with_connector(m, 2, targets=("ghost",)),
        "UnknownComponent"),
    "initial is a target": (
        lambda m: add_connector(m, SchedulingConnector("back", ConnectorKind.SEQUENCE, ("alt",), ("src",))),
        "InitialIsTarget"),
    "connector removed": (
        lambda m: drop_connector(m, 2),
        "Untargeted"),
    "final never scheduled": (
        lambda m: add_component(m, component("lonely", behavior="sink"), final=True),
        "FinalNotTargeted"),
    "island": (
        lambda m: add_connector(
            add_connector(add_component(add_component(m, component("isle_a")), component("isle_b")),
                          SchedulingConnector("ab", ConnectorKind.SEQUENCE, ("isle_a",), ("isle_b",))),
            SchedulingConnector("ba", ConnectorKind.SEQUENCE, ("isle_b",), ("isle_a",))),
        "Unreachable"),
    "dead end": (
        lambda m: with_connector(add_component(m, component("dead")), 0, targets=("left", "right", "dead")),
        "NoPathToFinal"),
    "component outside the scheduling graph": (
        lambda m: replace(m, spg=replace(m.spg, fsc=m.spg.fsc - {"alt"})),
        "FscMismatch"),
}


@pytest.mark.parametrize("name", sorted(MUTATIONS))
def test_single_mutation_fails_with_its_category(name, registry):
    mutate, category = MUTATIONS[name]
    with pytest.raises(ValidationFailed) as info:
        validate_system(mutate(base_model()), registry)
    assert category in info.value.categories()


def test_undeclared_required_port():
    model = with_component(base_model(), "alt", behavior="needs_key")
    with pytest.raises(ValidationFailed) as info:
        validate_system(model, needs_key_registry())
    assert "UndeclaredPort" in info.value.categories()


def test_mutation_count():
    assert len(MUTATIONS) >= 30


def test_base_model_is_valid(registry):
    model = base_model()
    assert validate_system(model, registry) is model


def test_shipped_fixtures_are_valid(drms_model, fork_join_model, registry):
    for model in (drms_model, fork_join_model):
        assert validate_system(model, registry) is model
    assert len(drms_model.components) == 10


def test_single_component_system(registry):
    model = build_system("one", [component("c0")], [], "c0", ["c0"])
    assert validate_system(model, registry) is model


def test_violations_carry_coordinates(registry):
    model = with_component(base_model(), "right", inputs=make_ports(Direction.INPUT, [("in", "key")]))
    with pytest.raises(ValidationFailed) as info:
        validate_system(model, registry)
    mismatch = next(v for v in info.value.violations if v.category == "TagMismatch")
    assert mismatch.edge == 1
    assert (mismatch.component, mismatch.port) == ("right", "in")
    assert "'key'" in mismatch.message and "'data'" in mismatch.message


def test_all_violations_reported_together(registry):
    model = with_connector(base_model(), 3, labels={"done": "same", "alt": "same"}, default_target="join")
    model = with_edges(model, model.ig.edges + (model.ig.edges[0],))
    with pytest.raises(ValidationFailed) as info:
        validate_system(model, registry)
    assert {"DuplicateLabel", "BadDefault", "DuplicateEdge"} <= set(info.value.categories())


# -- reachability ---------------------------------------------------------------

def spg(initial, connectors, fsc):
    return SchedulingGraph(frozenset(fsc), tuple(connectors), initial, frozenset())


def test_reachable_single_node():
    assert reachable_components(spg("a", [], ["a"])) == {"a"}


def test_reachable_chain():
    graph = spg("a", [
        SchedulingConnector("ab", ConnectorKind.SEQUENCE, ("a",), ("b",)),
        SchedulingConnector("bc", ConnectorKind.SEQUENCE, ("b",), ("c",)),
    ], "abc")
    assert reachable_components(graph) == {"a", "b", "c"}


def test_sync_needs_every_source():
    graph = spg("a", [SchedulingConnector("j", ConnectorKind.SYNCHRONIZATION, ("a", "b"), ("c",))], "abc")
    assert reachable_components(graph) == {"a"}


def test_reachability_is_monotone():
    rng = np.random.default_rng(11)
    for _ in range(50):
        model = random_sp_model(rng)
        before = reachable_components(model.spg)
        ids = sorted(model.components)
        extra = SchedulingConnector(
            "extra", ConnectorKind.SEQUENCE,
            (ids[int(rng.integers(len(ids)))],), (ids[int(rng.integers(len(ids)))],))
        after = reachable_components(replace(model.spg, connectors=model.spg.connectors + (extra,)))
        assert before <= after


def test_valid_models_reach_everything(registry):
    rng = np.random.default_rng(12)
    for _ in range(50):
        model = validate_system(random_sp_model(rng, with_ports=True, with_choice=bool(rng.integers(2))), registry)
        assert reachable_components(model.spg) == model.spg.fsc


# -- compatibility report ---------------------------------------------------------

def test_empty_interaction_graph_report():
    model = build_system("one", [component("c0")], [], "c0", ["c0"])
    assert compatibility_report(model) == []


def test_drms_edges_are_all_tag_ok(drms_model):
    report = compatibility_report(drms_model)
    assert len(report) == len(drms_model.ig.edges) == 18
    assert {status for _, status in report} == {EdgeStatus.TAG_OK}


def test_report_flags_missing_port():
    model = with_edges(base_model(), base_model().ig.edges + (edge(("src", "out"), ("alt", "nope")),))
    report = compatibility_report(model)
    assert report[-1] == (edge(("src", "out"), ("alt", "nope")), EdgeStatus.UNKNOWN_PORT)
    assert [status for _, status in report[:-1]] == [EdgeStatus.TAG_OK] * 5


def test_report_flags_tag_mismatch(drms_model):
    specs = dict(drms_model.components)
    specs["content_enc"] = replace(
        specs["content_enc"],
        inputs=make_ports(Direction.INPUT, [("plaintext", "rendition"), ("key", "license")]))
    report = compatibility_report(replace(drms_model, components=specs))
    mismatched = [e for e, status in report if status == EdgeStatus.TAG_MISMATCH]
    assert mismatched == [edge(("keygen", "key"), ("content_enc", "key"))]


def test_report_untagged_port_is_only_syntactic():
    components = [
        component("src", outputs=[("out", "")]),
        component("dst", [("in", "data")], behavior="sink", kinds=SW),
    ]
    connectors = [SchedulingConnector("go", ConnectorKind.SEQUENCE, ("src",), ("dst",))]
    model = build_system("untagged", components, connectors, "src", ["dst"], [(("src", "out"), ("dst", "in"))])
    assert compatibility_report(model) == [(edge(("src", "out"), ("dst", "in")), EdgeStatus.SYNTACTIC_OK)]
