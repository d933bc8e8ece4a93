from decimal import Decimal

import numpy as np
import pytest

from conftest import SYSTEMS
from core.behaviors import default_registry
from core.graph import build_system
from core.model import ComponentSpec
from constants import Kind
from factories import random_sp_model
from sysdesc.system import model_to_tree, parse_system, serialize_system
from sysdesc.tree import SystemDescriptionError, dumps, dumps_inline, loads, parse_tree


def drms_text():
    return (SYSTEMS / "drms_business_model.f4ms").read_text(encoding="utf-8")


def diagnostics_of(text, file="bad.f4ms"):
    with pytest.raises(SystemDescriptionError) as info:
        parse_system(text, file, default_registry())
    return info.value.diagnostics


# -- tree syntax ------------------------------------------------------------------

def test_tree_values():
    value = loads('{a: 1, b: 2.50, c: [true, false, null], "d e": "x", # note\n}')
    assert value == {"a": 1, "b": Decimal("2.5"), "c": [True, False, None], "d e": "x"}


def test_dumps_is_canonical():
    assert dumps_inline({"a": [1, Decimal("0.500")], "true": None}) == '{a: [1, 0.5], "true": null}'
    assert dumps({}) == "{}\n"


def test_exponent_is_rejected():
    with pytest.raises(SystemDescriptionError) as info:
        loads("{a: 1e5}")
    assert info.value.diagnostics[0].category == "SyntaxError"


def test_more_than_six_fraction_digits():
    with pytest.raises(SystemDescriptionError) as info:
        loads("{a: 0.1234567}")
    assert "fractional digits" in info.value.diagnostics[0].message


def test_duplicate_key_is_located():
    with pytest.raises(SystemDescriptionError) as info:
        parse_tree('{\n  a: 1,\n  a: 2\n}', "dup.f4ms")
    diagnostic = info.value.diagnostics[0]
    assert (diagnostic.location.line, diagnostic.location.column) == (3, 3)
    assert str(diagnostic).startswith("dup.f4ms:3:3: SyntaxError: ")


# -- parse_system -----------------------------------------------------------------

def test_parse_drms_fixture(drms_model):
    assert len(drms_model.components) == 10
    assert drms_model.spg.initial == "db"
    assert drms_model.spg.finals == frozenset({"reader"})
    assert drms_model.components["content_enc"].allowed_kinds == frozenset({Kind.SOFTWARE, Kind.HARDWARE})
    assert drms_model.components["content_enc"].costs.hw_time == Decimal("1.5")


def test_empty_input():
    (diagnostic,) = diagnostics_of("  # only a comment\n")
    assert diagnostic.category == "SyntaxError"
    assert (diagnostic.location.line, diagnostic.location.column) == (1, 1)


def test_unexpected_character():
    (diagnostic,) = diagnostics_of("{name: @}")
    assert diagnostic.category == "SyntaxError"
    assert diagnostic.location.column == 8


def test_choice_without_labels_is_schema_error():
    text = drms_text().replace('        labels: {webapp: "request", reader: "deliver"}\n', "")
    text = text.replace('guard_port: ["browser", "route"],', 'guard_port: ["browser", "route"]')
    (diagnostic,) = diagnostics_of(text)
    assert diagnostic.category == "SchemaError"
    assert diagnostic.location.path == "spg.connectors[1]"
    assert "labels" in diagnostic.message


def test_every_schema_error_is_reported():
    text = drms_text()
    text = text.replace('sw_time: 6,', 'sw_time: "six",')
    text = text.replace('kinds: ["SW"],\n      inputs: [{name: "license_order"', 'kinds: ["XW"],\n      inputs: [{name: "license_order"')
    text = text.replace('{id: "license_issue", kind: "seq"', '{id: "license_issue", kind: "loop"')
    text = text.replace('behavior: "reader"', 'behavior: "reader",\n      colour: "red"')
    diagnostics = diagnostics_of(text)
    assert len(diagnostics) >= 4
    assert {d.category for d in diagnostics} == {"SchemaError"}
    paths = {d.location.path for d in diagnostics}
    assert "components[2].costs.sw_time" in paths
    assert "spg.connectors[3].kind" in paths


def test_validation_diagnostic_points_at_edge():
    # first occurrence is content_enc's input, the second keygen's output
    text = drms_text().replace('{name: "key", tag: "session_key"}', '{name: "key", tag: "license"}', 1)
    (diagnostic,) = diagnostics_of(text, "tagged.f4ms")
    assert diagnostic.category == "ValidationError"
    assert diagnostic.code == "TagMismatch"
    assert diagnostic.location.path == "ig[13]"
    assert str(diagnostic).startswith("tagged.f4ms:")
    assert ": ValidationError: TagMismatch: " in str(diagnostic)


# -- serialize_system -------------------------------------------------------------

def test_fixture_roundtrip(drms_model):
    text = serialize_system(drms_model)
    assert parse_system(text, "<roundtrip>", default_registry()) == drms_model


def test_serialization_is_byte_stable(drms_model):
    assert serialize_system(drms_model) == serialize_system(drms_model)
    reparsed = parse_system(serialize_system(drms_model), "<roundtrip>", default_registry())
    assert serialize_system(reparsed) == serialize_system(drms_model)


def test_minimal_model_serialization():
    model = build_system("one", [ComponentSpec("c0", frozenset({Kind.SOFTWARE}))], [], "c0", ["c0"])
    tree = model_to_tree(model)
    assert len(tree["components"]) == 1
    assert tree["ig"] == []
    assert list(tree) == ["name", "components", "spg", "ig"]
    assert "ig: []" in serialize_system(model)


def test_params_survive_roundtrip():
    text = (SYSTEMS / "retry_loop.f4ms").read_text(encoding="utf-8")
    model = parse_system(text, "retry_loop.f4ms", default_registry())
    assert model.components["worker"].params == {"label": "again"}
    assert parse_system(serialize_system(model), "<roundtrip>", default_registry()) == model


@pytest.mark.slow
def test_random_models_roundtrip():
    registry = default_registry()
    rng = np.random.default_rng(2024)
    for _ in range(500):
        model = random_sp_model(rng, with_ports=True, with_choice=bool(rng.integers(2)))
        text = serialize_system(model)
        assert parse_system(text, "<random>", registry) == model
        assert serialize_system(parse_system(text, "<random>", registry)) == text
