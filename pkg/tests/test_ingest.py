"""File-format parsing, schema errors and serialization round-trips."""

import json
import random

import pytest

from grafcet_lint import load_spec, parse_spec, serialize
from grafcet_lint.ingest import (
    SpecSchemaError,
    SpecSemanticError,
    SpecSyntaxError,
)
from randspec import random_spec

MINIMAL = {
    "name": "m",
    "partials": [{"id": "P", "steps": [{"id": "1", "initial": True}]}],
}


def test_minimal_spec():
    spec = parse_spec(MINIMAL)
    assert spec.name == "m"
    assert spec.partials[0].initial == frozenset({"1"})


def test_invalid_json_reports_position():
    with pytest.raises(SpecSyntaxError, match="line 1"):
        parse_spec("{oops")


def test_unknown_top_level_field():
    with pytest.raises(SpecSchemaError, match="unknown field"):
        parse_spec({**MINIMAL, "extra": 1})


def test_queries_key_is_reserved_not_rejected():
    parse_spec({**MINIMAL, "queries": []})


def test_missing_partials():
    with pytest.raises(SpecSchemaError, match="partials"):
        parse_spec({"name": "m"})
    with pytest.raises(SpecSchemaError, match="non-empty"):
        parse_spec({"name": "m", "partials": []})


def test_wrong_field_type():
    with pytest.raises(SpecSchemaError, match="wrong type"):
        parse_spec({"name": 3, "partials": [{"id": "P", "steps": []}]})


def test_bad_variable_kind():
    doc = {**MINIMAL, "variables": [{"name": "v", "kind": "global", "type": "bool"}]}
    with pytest.raises(SpecSchemaError):
        parse_spec(doc)


def test_bad_condition_is_syntax_error():
    doc = json.loads(json.dumps(MINIMAL))
    doc["partials"][0]["transitions"] = [{"id": "t", "from": ["1"], "to": ["1"],
                                          "cond": "a &"}]
    with pytest.raises(SpecSyntaxError, match="bad condition"):
        parse_spec(doc)


def test_semantic_errors_carry_findings():
    doc = json.loads(json.dumps(MINIMAL))
    doc["partials"][0]["transitions"] = [{"id": "t", "from": ["1"], "to": ["zz"]}]
    with pytest.raises(SpecSemanticError) as exc:
        parse_spec(doc)
    assert any(f.kind == "model-error" for f in exc.value.findings)


def test_unknown_action_kind():
    doc = json.loads(json.dumps(MINIMAL))
    doc["partials"][0]["actions"] = [{"kind": "pulse", "step": "1"}]
    with pytest.raises(SpecSchemaError, match="unknown action kind"):
        parse_spec(doc)


def test_forcing_situation_forms():
    doc = json.loads(json.dumps(MINIMAL))
    doc["partials"].append({"id": "Q", "steps": [{"id": "q", "marked": True}]})
    doc["partials"][0]["actions"] = [
        {"kind": "forcing", "step": "1", "target": "Q", "situation": "*"}]
    spec = parse_spec(doc)
    assert spec.partials[0].forcings[0].situation == "*"
    doc["partials"][0]["actions"][0]["situation"] = "frozen"
    with pytest.raises(SpecSchemaError):
        parse_spec(doc)


@pytest.mark.parametrize("name", [
    "fig1", "fig2_g1", "fig2_g2", "fig2_g3", "fig2_g4", "fig2_g5",
    "fig2_g6", "fig2_g7", "fig2_g8", "fig4", "fig5", "g_rit",
])
def test_corpus_roundtrip(corpus, name):
    spec = load_spec(corpus(f"{name}.grafcet.json"))
    again = parse_spec(serialize(spec))
    assert again == spec


def test_random_specs_roundtrip():
    rng = random.Random(7)
    for _ in range(50):
        spec = random_spec(rng)
        assert parse_spec(serialize(spec)) == spec
