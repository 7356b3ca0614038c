"""Race detection, condition satisfiability and safety queries."""

import pytest

from grafcet_lint import analyze_spec, parse_spec
from grafcet_lint.checks import parse_queries, run_queries


def _kinds(result, kind, severity=None):
    return [f for f in result.findings
            if f.kind == kind and (severity is None or f.severity == severity)]


class TestRaces:
    @pytest.mark.parametrize("name, steps", [
        ("fig2_g1", ("G1.1", "G1.1")),
        ("fig2_g2", ("G2.1", "G2.2")),
        ("fig2_g3", ("G3.1", "G3.2")),
        ("fig2_g4", ("G4.2", "G4.3")),
        ("fig2_g5", ("G5.1", "G5.2")),
        ("fig2_g6", ("G6.2", "G6.3")),
    ])
    def test_intra_partial_races(self, load_fixture, name, steps):
        result = analyze_spec(load_fixture(f"{name}.grafcet.json"))
        races = _kinds(result, "race", "error")
        assert len(races) == 1
        assert dict(races[0].evidence)["steps"] == steps

    def test_sequential_loop_is_not_a_race(self, load_fixture):
        result = analyze_spec(load_fixture("fig2_g7.grafcet.json"))
        assert _kinds(result, "race") == []

    def test_cross_partial_race(self, load_fixture):
        result = analyze_spec(load_fixture("fig2_g8.grafcet.json"))
        races = _kinds(result, "race", "error")
        assert len(races) == 1
        assert dict(races[0].evidence)["steps"] == ("G7.2", "G8.2")

    def test_unreachable_writers_do_not_race(self):
        result = analyze_spec(parse_spec({
            "name": "t",
            "variables": [{"name": "k", "kind": "internal", "type": "int", "init": 0}],
            "partials": [{
                "id": "P",
                "steps": [{"id": "1", "initial": True}, {"id": "2", "initial": True},
                          {"id": "3"}],
                "actions": [
                    {"kind": "stored", "step": "1", "var": "k", "value": "0"},
                    {"kind": "stored", "step": "3", "var": "k", "value": "1"},
                ],
            }],
        }))
        assert _kinds(result, "race") == []

    def test_continuous_read_by_concurrent_stored_is_informational(self):
        result = analyze_spec(parse_spec({
            "name": "t",
            "variables": [
                {"name": "k", "kind": "internal", "type": "int", "init": 0},
                {"name": "o", "kind": "output", "type": "bool", "init": 0},
            ],
            "partials": [{
                "id": "P",
                "steps": [{"id": "1", "initial": True}, {"id": "2", "initial": True}],
                "actions": [
                    {"kind": "continuous", "step": "1", "var": "o"},
                    {"kind": "stored", "step": "2", "var": "k", "value": "k + 1",
                     "cond": "o"},
                ],
            }],
        }))
        # Races require two stored writers; reading a live continuous output
        # from a concurrent step is only worth a note.
        assert _kinds(result, "race", "error") == []


class TestConditions:
    def test_unsatisfiable_interval_condition(self, load_fixture):
        spec = parse_spec({
            "name": "t",
            "variables": [{"name": "k", "kind": "internal", "type": "int", "init": 0}],
            "partials": [{
                "id": "P",
                "steps": [{"id": "1", "initial": True}, {"id": "2"}],
                "transitions": [{"id": "t1", "from": ["1"], "to": ["2"],
                                 "cond": "k = 7"}],
            }],
        })
        result = analyze_spec(spec)
        unsat = _kinds(result, "unsat-condition", "error")
        assert len(unsat) == 1 and unsat[0].element == "t1"

    def test_unreachable_step_variable_is_unsat(self):
        result = analyze_spec(parse_spec({
            "name": "t",
            "partials": [{
                "id": "P",
                "steps": [{"id": "1", "initial": True}, {"id": "2"}, {"id": "3"}],
                "transitions": [
                    {"id": "t1", "from": ["1"], "to": ["1"], "cond": "XP.3"},
                ],
            }],
        }))
        assert len(_kinds(result, "unsat-condition", "error")) == 1
        assert len(_kinds(result, "unreachable-step", "warning")) == 2

    def test_constant_true_condition_is_informational(self):
        result = analyze_spec(parse_spec({
            "name": "t",
            "partials": [{
                "id": "P",
                "steps": [{"id": "1", "initial": True}],
                "transitions": [{"id": "t1", "from": ["1"], "to": ["1"],
                                 "cond": "1 = 1"}],
            }],
        }))
        assert len(_kinds(result, "always-true-condition", "info")) == 1

    def test_input_driven_condition_is_fine(self, load_fixture):
        result = analyze_spec(load_fixture("fig1.grafcet.json"))
        assert _kinds(result, "unsat-condition") == []
        assert _kinds(result, "always-true-condition") == []


class TestQueries:
    def test_parse_queries_validates(self):
        with pytest.raises(ValueError, match="unknown kind"):
            parse_queries([{"kind": "sometimes"}])
        with pytest.raises(ValueError, match="steps"):
            parse_queries([{"kind": "never-concurrent", "steps": ["only-one"]}])
        with pytest.raises(ValueError, match="missing term"):
            parse_queries([{"kind": "never-coactive", "a": {"var": "v"}}])

    def test_never_concurrent(self, load_fixture):
        # In the alternating loop G7, steps 1 and 2 are never simultaneously
        # active, so the query passes.
        g7 = load_fixture("fig2_g7.grafcet.json")
        g7_result = analyze_spec(g7)
        ok = parse_queries([{"name": "q", "kind": "never-concurrent",
                             "steps": ["G7.1", "G7.2"]}])
        assert run_queries(g7, g7_result.global_concurrency,
                           g7_result.global_reachable,
                           g7_result.variables, ok) == []
        spec = load_fixture("fig5.grafcet.json")
        result = analyze_spec(spec)
        bad = parse_queries([{"name": "q", "kind": "never-concurrent",
                              "steps": ["c.s3", "c.s4"]}])
        findings = run_queries(spec, result.global_concurrency, result.global_reachable,
                               result.variables, bad)
        assert [f.kind for f in findings] == ["query-violation"]

    def test_never_concurrent_unknown_step(self, load_fixture):
        spec = load_fixture("fig5.grafcet.json")
        result = analyze_spec(spec)
        q = parse_queries([{"kind": "never-concurrent", "steps": ["c.zz", "c.s1"]}])
        with pytest.raises(ValueError, match="unknown step"):
            run_queries(spec, result.global_concurrency, result.global_reachable,
                        result.variables, q)

    def test_never_coactive_default_vs_naive(self, load_fixture):
        spec = load_fixture("g_rit.grafcet.json")
        result = analyze_spec(spec)
        q = parse_queries([{"name": "q", "kind": "never-coactive",
                            "a": {"var": "rotateTable", "value": True},
                            "b": {"var": "stationMotion1", "value": True}}])
        args = (spec, result.global_concurrency, result.global_reachable,
                result.variables, q)
        assert run_queries(*args) == []
        naive = run_queries(*args, naive=True)
        assert [f.kind for f in naive] == ["query-violation"]
        assert "value-set approximation" in naive[0].message

    def test_never_coactive_real_violation(self, load_fixture):
        spec = load_fixture("g_rit.grafcet.json")
        result = analyze_spec(spec)
        q = parse_queries([{"name": "q", "kind": "never-coactive",
                            "a": {"var": "stationMotion1", "value": True},
                            "b": {"var": "stationMotion2", "value": True}}])
        findings = run_queries(spec, result.global_concurrency,
                               result.global_reachable, result.variables, q)
        assert [f.kind for f in findings] == ["query-violation"]

    def test_never_coactive_requires_bool(self, load_fixture):
        spec = load_fixture("fig5.grafcet.json")
        result = analyze_spec(spec)
        q = parse_queries([{"kind": "never-coactive",
                            "a": {"var": "k", "value": True},
                            "b": {"var": "k", "value": False}}])
        with pytest.raises(ValueError, match="Boolean"):
            run_queries(spec, result.global_concurrency, result.global_reachable,
                        result.variables, q, naive=True)
